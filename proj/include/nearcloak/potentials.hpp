////////////////////////////////////////////////////////////////////////////////
// potentials.hpp
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Fundamental solutions and layer potentials of the time-harmonic Lame system
//      mu Lap u + (lambda + mu) grad div u + eta^2 u = 0.
//
//  Kupradze tensor:
//      Pi(x, y) = (1/mu) G_ks I + (1/eta^2) grad grad^T (G_ks - G_kp),
//  kp = eta / sqrt(lambda + 2 mu), ks = eta / sqrt(mu), with the Helmholtz kernel
//  G_k = (i/4) H0(k r) in 2D and exp(i k r) / (4 pi r) in 3D.  All derivatives
//  are analytic: radial kernels are differentiated through r = |x - y| using
//  the Helmholtz ODE for the higher derivatives.
//
//  Only off-boundary evaluation of layer potentials is provided.
*/
////////////////////////////////////////////////////////////////////////////////
#pragma once

#include <array>
#include <complex>
#include <functional>

#include <Eigen/Dense>

#include "nearcloak/tensor.hpp"

namespace nearcloak {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, 3, 1>;

struct LameKernelParams {
    double lambda0 = 1.0;
    double mu0 = 1.0;
    double eta = 1.0;

    double kp() const;
    double ks() const;
    /// Throws DomainError unless mu0 > 0, lambda0 + 2 mu0 > 0 and eta > 0.
    void validate() const;
};

/// H0^(1)(z) and H1^(1)(z) for real z > 0: power series below z = 16,
/// asymptotic expansion above.
Complex hankel1_0(double z);
Complex hankel1_1(double z);

/// G_k(x, y).  Throws DomainError for x = y or k <= 0.
Complex fundamental_scalar(const SmallVector &x, const SmallVector &y, double k, int dim);

ComplexMatrix kupradze_tensor(const SmallVector &x, const SmallVector &y, const LameKernelParams &params);

/// d Pi_ab / d x_m stored as grad[m](a, b).
std::array<ComplexMatrix, 3> kupradze_gradient(const SmallVector &x, const SmallVector &y, const LameKernelParams &params);

/// Xi(x, y): row i is the Lame traction, at y with normal nu, of the field
/// y -> Pi(x, y) e_i.
ComplexMatrix traction_kernel(const SmallVector &x, const SmallVector &y, const SmallVector &nu,
                              const LameKernelParams &params);

/// Circle carrying a 2D layer density.
struct CircleLayer {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double radius = 1.0;
};

using LayerDensity = std::function<Eigen::Vector2cd(double theta)>;

/// Trapezoidal rule with n_quad nodes.  Throws DomainError when x is closer
/// to the circle than three node spacings.
Eigen::Vector2cd single_layer_eval(const CircleLayer &layer, const LayerDensity &psi, const Eigen::Vector2d &x,
                                   const LameKernelParams &params, int n_quad);
Eigen::Vector2cd double_layer_eval(const CircleLayer &layer, const LayerDensity &psi, const Eigen::Vector2d &x,
                                   const LameKernelParams &params, int n_quad);

using VectorField = std::function<ComplexVector(const SmallVector &)>;

/// |mu Lap u + (lambda + mu) grad div u + eta^2 u| / (sum of the three term
/// magnitudes), central differences with step `step`.
double navier_residual(const VectorField &u, const SmallVector &x, const LameKernelParams &params, double step = 1e-3);

} // namespace nearcloak
