#include "nearcloak/residual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "nearcloak/errors.hpp"

namespace nearcloak {

ResidualStressField::ResidualStressField()
    : m_t([](const Point2 &) { return SymStress2{}; }),
      m_grad([](const Point2 &) { return StressGradient{}; }),
      m_support(0.0) {}

ResidualStressField::ResidualStressField(StressFn t, GradientFn grad, double support_radius)
    : m_t(std::move(t)), m_grad(std::move(grad)), m_support(support_radius) {}

ResidualStressField ResidualStressField::scaled(double k) const {
    auto t = m_t;
    auto g = m_grad;
    return ResidualStressField(
        [t, k](const Point2 &x) {
            SymStress2 s = t(x);
            return SymStress2{k * s.t11, k * s.t12, k * s.t22};
        },
        [g, k](const Point2 &x) {
            StressGradient d = g(x);
            for (auto &e : d.d) e = SymStress2{k * e.t11, k * e.t12, k * e.t22};
            return d;
        },
        k == 0.0 ? 0.0 : m_support);
}

void AiryPotential::derivatives(const Point2 &x, Eigen::Matrix2d &hess, std::array<Eigen::Matrix2d, 2> &third) const {
    hess.setZero();
    third[0].setZero();
    third[1].setZero();
    for (const AiryBump &b : bumps) {
        const Point2 d = x - b.center;
        const double rho2 = b.radius * b.radius;
        const double q = d.squaredNorm() / rho2;
        if (q >= 1.0) continue;
        const double s = 1.0 / (1.0 - q);
        const double f = std::exp(-s);
        const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
        const double f1 = -s2 * f;
        const double f2 = f * (s4 - 2.0 * s3);
        const double f3 = f * (-s4 * s2 + 6.0 * s4 * s - 6.0 * s4);

        const Point2 dq = 2.0 * d / rho2; // d_i q
        const double ddq = 2.0 / rho2;    // d_ij q = ddq * delta_ij
        const double a = b.amplitude;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                hess(i, j) += a * (f2 * dq[i] * dq[j] + f1 * (i == j ? ddq : 0.0));
                for (int m = 0; m < 2; ++m) {
                    const double cross = (i == m ? ddq * dq[j] : 0.0) + (j == m ? ddq * dq[i] : 0.0)
                                       + (i == j ? ddq * dq[m] : 0.0);
                    third[m](i, j) += a * (f3 * dq[i] * dq[j] * dq[m] + f2 * cross);
                }
            }
    }
}

ResidualStressField airy_to_stress(const AiryPotential &phi, double domain_radius) {
    double support = 0.0;
    for (const AiryBump &b : phi.bumps) {
        if (!(b.radius > 0.0)) throw AdmissibilityError("Airy bump radius must be positive");
        const double reach = b.center.norm() + b.radius;
        if (reach >= domain_radius)
            throw AdmissibilityError("Airy bump support must lie strictly inside the domain");
        if (b.amplitude != 0.0) support = std::max(support, reach);
    }
    if (support == 0.0) return ResidualStressField();

    return ResidualStressField(
        [phi](const Point2 &x) {
            Eigen::Matrix2d h;
            std::array<Eigen::Matrix2d, 2> t3;
            phi.derivatives(x, h, t3);
            return SymStress2{h(1, 1), -h(0, 1), h(0, 0)};
        },
        [phi](const Point2 &x) {
            Eigen::Matrix2d h;
            std::array<Eigen::Matrix2d, 2> t3;
            phi.derivatives(x, h, t3);
            StressGradient g;
            for (int m = 0; m < 2; ++m) g.d[m] = SymStress2{t3[m](1, 1), -t3[m](0, 1), t3[m](0, 0)};
            return g;
        },
        support);
}

bool AdmissibilityReport::admissible(double div_tol) const {
    return symmetry_ok && divfree_max_residual <= div_tol && boundary_traction_max == 0.0
        && min_convexity_over_samples > 0.0;
}

AdmissibilityReport verify_admissible(const ResidualStressField &t, const IsotropicModuli &base,
                                      double domain_radius, int n_samples) {
    AdmissibilityReport rep;
    rep.min_convexity_over_samples = std::numeric_limits<double>::infinity();
    rep.min_ellipticity_over_samples = std::numeric_limits<double>::infinity();
    const int n = std::max(n_samples, 2);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Point2 x(-domain_radius + 2.0 * domain_radius * a / (n - 1),
                           -domain_radius + 2.0 * domain_radius * b / (n - 1));
            if (x.norm() > domain_radius) continue;
            const SymStress2 s = t.t(x);
            const SmallMatrix m = s.matrix();
            rep.symmetry_ok = rep.symmetry_ok && m(0, 1) == m(1, 0);
            rep.divfree_max_residual = std::max(rep.divfree_max_residual, t.grad_t(x).divergence().cwiseAbs().maxCoeff());
            rep.min_convexity_over_samples =
                std::min(rep.min_convexity_over_samples, convexity_constant(make_isotropic_residual(base, m, 2)));
            // mu + b.T.b + (lambda + mu)(a.b)^2, minimised over unit a and b.
            const double t_min = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m).eigenvalues()[0];
            rep.min_ellipticity_over_samples = std::min(rep.min_ellipticity_over_samples,
                                                        base.mu + t_min + std::min(0.0, base.lambda + base.mu));
            ++rep.samples;
        }
    const int nb = 4 * n;
    for (int k = 0; k < nb; ++k) {
        const double th = 2.0 * M_PI * k / nb;
        const Point2 nu(std::cos(th), std::sin(th));
        const Point2 traction = t.t(domain_radius * nu).matrix() * nu;
        rep.boundary_traction_max = std::max(rep.boundary_traction_max, traction.cwiseAbs().maxCoeff());
    }
    return rep;
}

} // namespace nearcloak
