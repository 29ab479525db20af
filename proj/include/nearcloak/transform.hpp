////////////////////////////////////////////////////////////////////////////////
// transform.hpp
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Radial blow-up maps of B_2 and the push-forward of (C, rho).
//
//  Both maps have the form x -> R(|x|) x/|x| and are the identity on |x| = 2:
//    singular:     R(s) = 1 + s/2                       (0, 2] -> (1, 2]
//    regularized:  R(s) = (2 - 2h)/(2 - h) + s/(2 - h)  for h <= s <= 2
//                  R(s) = s / h                         for s < h
//  The regularized map has a radial kink on |x| = h; callers that know which
//  side of the kink a point belongs to pass the branch explicitly.
*/
////////////////////////////////////////////////////////////////////////////////
#pragma once

#include <complex>

#include "nearcloak/tensor.hpp"

namespace nearcloak {

using Complex = std::complex<double>;

struct JacobianSample {
    SmallMatrix m; ///< m(i, j) = d x~_i / d x_j
    double det = 0.0;

    JacobianSample() = default;
    explicit JacobianSample(const SmallMatrix &jac) : m(jac), det(jac.determinant()) {}
};

class RadialMap {
public:
    enum class Kind { Singular, Regularized };
    /// Which radial formula to use; Auto picks by radius (outer branch at |x| = h).
    enum class Branch { Auto, Outer, Inner };

    static constexpr double outer_radius = 2.0;

    static RadialMap singular();
    /// Throws DomainError unless 0 < h < 1.
    static RadialMap regularized(double h);

    Kind kind() const { return m_kind; }
    double h() const { return m_h; }

    SmallVector apply(const SmallVector &x, Branch branch = Branch::Auto) const;
    SmallVector inverse(const SmallVector &y, Branch branch = Branch::Auto) const;
    JacobianSample jacobian(const SmallVector &x, Branch branch = Branch::Auto) const;

    /// Radial profile and its derivative.
    double radius(double s, Branch branch = Branch::Auto) const;
    double radius_derivative(double s, Branch branch = Branch::Auto) const;

private:
    RadialMap(Kind kind, double h) : m_kind(kind), m_h(h) {}
    bool inner(double s, Branch branch) const;

    Kind m_kind;
    double m_h;
};

/// (1 + |x|/2) x/|x|; DomainError at x = 0 or |x| > 2.
SmallVector f0(const SmallVector &x);
SmallVector fh(const SmallVector &x, double h);
SmallVector fh_inverse(const SmallVector &y, double h);

/// C~_iqkp = (1/det M) sum_jl C_ijkl M_pl M_qj.  OrientationError if det M <= 0.
ElasticTensor4 push_forward_tensor(const ElasticTensor4 &c, const JacobianSample &jac);
/// rho / det M.
Complex push_forward_density(Complex rho, const JacobianSample &jac);

/// Closed-form (r, theta) components of (F_0)_* C^0 in 2D at output radius r.
/// `t_polar` is the residual stress at the preimage, in the polar frame there
/// (t(0,0) = t_rr, t(1,1) = t_thth, t(0,1) = t_rth).  Entry names list the four
/// indices in order, with t standing for theta.  The stretch factors
/// (r - 1)/r and r/(r - 1) attach to the derivative slots (2nd and 4th).
struct PolarCloakEntries {
    double rrrr, tttt;
    double rtrt, trtr;
    double rrtt, ttrr;
    double rttr, trrt;
    double rrrt, rtrr;
    double trtt, tttr;
};

PolarCloakEntries polar_cloak_entries(double r, double lambda0, double mu0, const SmallMatrix &t_polar);

/// Frame with columns (e_r, e_theta) at angle theta.
SmallMatrix polar_frame(double theta);

} // namespace nearcloak
