#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "nearcloak/tensor.hpp"

namespace nearcloak {

using Point2 = Eigen::Vector2d;

/// Symmetric 2x2 stress stored by its upper triangle, so t12 == t21 exactly.
struct SymStress2 {
    double t11 = 0.0, t12 = 0.0, t22 = 0.0;

    SmallMatrix matrix() const {
        SmallMatrix m(2, 2);
        m << t11, t12, t12, t22;
        return m;
    }
};

/// First partials of a stress field: d[m] = d/dx_m of every entry.
struct StressGradient {
    std::array<SymStress2, 2> d;

    /// sum_l d_l t_jl for j = 1, 2.
    Point2 divergence() const { return {d[0].t11 + d[1].t12, d[0].t12 + d[1].t22}; }
};

class ResidualStressField {
public:
    using StressFn = std::function<SymStress2(const Point2 &)>;
    using GradientFn = std::function<StressGradient(const Point2 &)>;

    /// T identically zero.
    ResidualStressField();
    ResidualStressField(StressFn t, GradientFn grad, double support_radius);

    int dim() const { return 2; }
    SymStress2 t(const Point2 &x) const { return m_t(x); }
    StressGradient grad_t(const Point2 &x) const { return m_grad(x); }
    /// T vanishes for |x| >= support_radius.
    double support_radius() const { return m_support; }
    bool is_zero() const { return m_support == 0.0; }

    /// Same field with every value multiplied by `k`.
    ResidualStressField scaled(double k) const;

private:
    StressFn m_t;
    GradientFn m_grad;
    double m_support;
};

/// a * exp(-1 / (1 - |x - c|^2 / rho^2)) inside the ball, 0 outside.
struct AiryBump {
    Point2 center{0.5, 0.0};
    double radius = 0.3;
    double amplitude = 0.02;
};

struct AiryPotential {
    std::vector<AiryBump> bumps;

    /// Second and third partials of the potential at x:
    /// hess(i, j) = d_ij phi, third[m](i, j) = d_ijm phi.
    void derivatives(const Point2 &x, Eigen::Matrix2d &hess, std::array<Eigen::Matrix2d, 2> &third) const;
};

/// T = [[phi_22, -phi_12], [-phi_12, phi_11]].  Throws AdmissibilityError if any
/// bump ball reaches the boundary of the disc of radius `domain_radius`.
ResidualStressField airy_to_stress(const AiryPotential &phi, double domain_radius = 2.0);

struct AdmissibilityReport {
    bool symmetry_ok = true;
    double divfree_max_residual = 0.0;
    double boundary_traction_max = 0.0;
    double min_convexity_over_samples = 0.0;
    /// min over unit a, b of C(a x b, a x b): the rank-one (Legendre-Hadamard)
    /// margin that the full-gradient operator needs.  Not part of admissible().
    double min_ellipticity_over_samples = 0.0;
    int samples = 0;

    bool admissible(double div_tol = 1e-8) const;
};

/// Samples an n x n grid clipped to the disc plus 4n boundary points.
AdmissibilityReport verify_admissible(const ResidualStressField &t, const IsotropicModuli &base,
                                      double domain_radius, int n_samples);

} // namespace nearcloak
