////////////////////////////////////////////////////////////////////////////////
// tensor.hpp
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Rank-4 elasticity tensors in 2D and 3D.
//
//  The tensors handled here carry major symmetry C_ijkl = C_klij but, once a
//  residual stress t_jl delta_ik is added, NOT the minor symmetry
//  C_ijkl = C_jikl.  Nothing in this module symmetrizes a tensor behind the
//  caller's back: storage is the full dim^4 array.
//
//  Index convention: C(i, j, k, l) pairs the displacement component k and
//  its derivative direction l with the test component i and derivative j,
//  i.e. the operator is  d_j ( C_ijkl d_l u_k ).
*/
////////////////////////////////////////////////////////////////////////////////
#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Dense>

namespace nearcloak {

/// Heap-free dynamic matrix with at most 3x3 entries.
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
/// Symmetric-matrix (Voigt) space: 3x3 in 2D, 6x6 in 3D.
using VoigtStorage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;

class ElasticTensor4 {
public:
    explicit ElasticTensor4(int dim = 2);

    int dim() const { return m_dim; }

    double operator()(int i, int j, int k, int l) const { return m_c[index(i, j, k, l)]; }
    double &operator()(int i, int j, int k, int l) { return m_c[index(i, j, k, l)]; }

    double max_abs() const;

    ElasticTensor4 &operator*=(double s);
    ElasticTensor4 &operator+=(const ElasticTensor4 &b);
    friend ElasticTensor4 operator*(double s, ElasticTensor4 c) { return c *= s; }
    friend ElasticTensor4 operator+(ElasticTensor4 a, const ElasticTensor4 &b) { return a += b; }

private:
    std::size_t index(int i, int j, int k, int l) const {
        return static_cast<std::size_t>(((i * m_dim + j) * m_dim + k) * m_dim + l);
    }

    int m_dim;
    std::array<double, 81> m_c{};
};

struct IsotropicModuli {
    double lambda = 1.0;
    double mu = 1.0;

    /// mu >= c0 and dim*lambda + 2 mu >= c0.
    bool strongly_convex(int dim, double c0 = 0.0) const {
        return mu > c0 && dim * lambda + 2.0 * mu > c0;
    }
};

struct VoigtMatrix {
    int dim = 2;
    VoigtStorage m;
};

struct SymmetryFlags {
    bool major = false;
    bool minor = false;
};

/// C_ijkl = lambda d_ij d_kl + mu (d_ik d_jl + d_il d_jk) + t_jl d_ik.
/// Throws AdmissibilityError when `t` is not symmetric.
ElasticTensor4 make_isotropic_residual(const IsotropicModuli &moduli, const SmallMatrix &t, int dim);

/// Isotropic tensor without residual stress.
ElasticTensor4 make_isotropic(const IsotropicModuli &moduli, int dim);

/// Voigt contraction (11->1, 22->2, 33->3, 23->4, 13->5, 12->6) of the raw
/// entries, no engineering factors.  A row/column pair (ii) contributes its
/// single entry; a shear pair (ij) sums over both index orders, except on the
/// shear diagonal where the cross term C_ijji is counted once with a minus
/// sign.  A minor-symmetric tensor therefore maps to its usual Voigt matrix,
/// and the residual-stress part t_jl d_ik maps to the T table
/// [[t11,0,t12],[0,t22,t12],[t12,t12,t11+t22]] (2D).
VoigtMatrix to_voigt(const ElasticTensor4 &c);

/// Inverse of to_voigt on the image of the isotropic-plus-residual family:
/// decodes (lambda, mu, T) and rebuilds the tensor.  Throws AdmissibilityError
/// when `v` is not in that image.
ElasticTensor4 from_voigt(const VoigtMatrix &v);

/// min over unit-Frobenius symmetric eps of C_ijkl eps_ij eps_kl.
double convexity_constant(const ElasticTensor4 &c);

/// Relative tolerance 1e-12 * max|C|.
SymmetryFlags check_symmetries(const ElasticTensor4 &c);

/// C'_abcd = Q_ia Q_jb Q_kc Q_ld C_ijkl; columns of `q` are the new frame.
ElasticTensor4 rotate_tensor(const ElasticTensor4 &c, const SmallMatrix &q);

/// sigma_ij = sum_kl C_ijkl g_kl for a displacement gradient g (g_kl = d_l u_k).
SmallMatrix contract(const ElasticTensor4 &c, const SmallMatrix &grad);

} // namespace nearcloak
