#include "doctest.h"

#include "nearcloak/errors.hpp"
#include "nearcloak/residual.hpp"

using namespace nearcloak;

namespace {

// Bump potential evaluated directly, for finite differences.
double bump_value(const AiryBump &b, const Point2 &x) {
    const double q = (x - b.center).squaredNorm() / (b.radius * b.radius);
    return q < 1.0 ? b.amplitude * std::exp(-1.0 / (1.0 - q)) : 0.0;
}

double phi_value(const std::vector<AiryBump> &bumps, const Point2 &x) {
    double s = 0.0;
    for (const AiryBump &b : bumps) s += bump_value(b, x);
    return s;
}

ResidualStressField field(std::vector<AiryBump> bumps) {
    AiryPotential p;
    p.bumps = std::move(bumps);
    return airy_to_stress(p, 2.0);
}

// Fourth-order central difference of the stress entries, step hs.
Point2 fd_divergence(const ResidualStressField &t, const Point2 &x, double hs) {
    auto d = [&](int axis, auto get) {
        Point2 e = Point2::Zero();
        e[axis] = hs;
        return (-get(t.t(x + 2 * e)) + 8 * get(t.t(x + e)) - 8 * get(t.t(x - e)) + get(t.t(x - 2 * e))) / (12 * hs);
    };
    auto t11 = [](const SymStress2 &s) { return s.t11; };
    auto t12 = [](const SymStress2 &s) { return s.t12; };
    auto t22 = [](const SymStress2 &s) { return s.t22; };
    return {d(0, t11) + d(1, t12), d(0, t12) + d(1, t22)};
}

} // namespace

TEST_CASE("zero potential gives zero stress") {
    const ResidualStressField t = field({});
    CHECK(t.is_zero());
    const SymStress2 s = t.t({0.3, 0.1});
    CHECK(s.t11 == 0.0);
    CHECK(s.t12 == 0.0);
    CHECK(s.t22 == 0.0);
    const ResidualStressField dflt;
    CHECK(dflt.t({1.0, 1.0}).t11 == 0.0);
}

TEST_CASE("stress entries are the Airy second derivatives") {
    const AiryBump b{{0.5, 0.0}, 0.3, 0.1};
    const ResidualStressField t = field({b});
    const double hs = 1e-4;
    for (const Point2 &x : {Point2(0.5, 0.0), Point2(0.6, 0.1), Point2(0.35, -0.12), Point2(0.7, 0.05)}) {
        auto p = [&](double dx, double dy) { return phi_value({b}, x + Point2(dx, dy)); };
        const double pxx = (p(hs, 0) - 2 * p(0, 0) + p(-hs, 0)) / (hs * hs);
        const double pyy = (p(0, hs) - 2 * p(0, 0) + p(0, -hs)) / (hs * hs);
        const double pxy = (p(hs, hs) - p(hs, -hs) - p(-hs, hs) + p(-hs, -hs)) / (4 * hs * hs);
        const SymStress2 s = t.t(x);
        CHECK(s.t11 == doctest::Approx(pyy).epsilon(1e-5));
        CHECK(s.t22 == doctest::Approx(pxx).epsilon(1e-5));
        CHECK(s.t12 == doctest::Approx(-pxy).epsilon(1e-5));
    }
}

TEST_CASE("analytic gradient agrees with finite differences of the stress") {
    const ResidualStressField t = field({{{0.5, 0.0}, 0.3, 0.1}, {{-0.8, 0.6}, 0.4, -0.05}});
    // Fourth-order stencil: gradients reach several hundred near the support edges.
    const double hs = 1e-4;
    for (int a = 0; a < 12; ++a)
        for (int b = 0; b < 12; ++b) {
            const Point2 x(-1.3 + 2.0 * a / 11, -0.4 + 1.2 * b / 11);
            const StressGradient g = t.grad_t(x);
            for (int m = 0; m < 2; ++m) {
                Point2 e = Point2::Zero();
                e[m] = hs;
                const SymStress2 p2 = t.t(x + 2 * e), p1 = t.t(x + e), m1 = t.t(x - e), m2 = t.t(x - 2 * e);
                auto fd = [&](auto get) { return (-get(p2) + 8 * get(p1) - 8 * get(m1) + get(m2)) / (12 * hs); };
                CHECK(std::abs(g.d[m].t11 - fd([](const SymStress2 &s) { return s.t11; })) <= 1e-5);
                CHECK(std::abs(g.d[m].t12 - fd([](const SymStress2 &s) { return s.t12; })) <= 1e-5);
                CHECK(std::abs(g.d[m].t22 - fd([](const SymStress2 &s) { return s.t22; })) <= 1e-5);
            }
        }
}

TEST_CASE("single bump is divergence free on a 50 x 50 grid") {
    const ResidualStressField t = field({{{0.5, 0.0}, 0.3, 0.1}});
    double worst_analytic = 0.0, worst_fd = 0.0;
    for (int a = 0; a < 50; ++a)
        for (int b = 0; b < 50; ++b) {
            const Point2 x(0.2 + 0.6 * a / 49, -0.3 + 0.6 * b / 49);
            worst_analytic = std::max(worst_analytic, t.grad_t(x).divergence().cwiseAbs().maxCoeff());
            worst_fd = std::max(worst_fd, fd_divergence(t, x, 1e-5).cwiseAbs().maxCoeff());
        }
    CHECK(worst_analytic <= 1e-8);
    CHECK(worst_fd <= 1e-8);
}

TEST_CASE("stress is symmetric by storage and vanishes outside its support") {
    const ResidualStressField t = field({{{0.5, 0.0}, 0.3, 0.1}});
    CHECK(t.support_radius() == doctest::Approx(0.8));
    const SmallMatrix m = t.t({0.6, 0.1}).matrix();
    CHECK(m(0, 1) == m(1, 0));
    const SymStress2 out = t.t({1.5, 0.0});
    CHECK(out.t11 == 0.0);
    CHECK(out.t12 == 0.0);
    CHECK(out.t22 == 0.0);
}

TEST_CASE("scaling is linear") {
    const ResidualStressField t = field({{{0.5, 0.0}, 0.3, 0.1}});
    const ResidualStressField t3 = field({{{0.5, 0.0}, 0.3, 0.3}});
    const ResidualStressField s = t.scaled(3.0);
    for (const Point2 &x : {Point2(0.5, 0.0), Point2(0.62, -0.1)}) {
        CHECK(s.t(x).t11 == doctest::Approx(t3.t(x).t11).epsilon(1e-14));
        CHECK(s.t(x).t12 == doctest::Approx(t3.t(x).t12).epsilon(1e-14));
        CHECK(s.t(x).t22 == doctest::Approx(t3.t(x).t22).epsilon(1e-14));
        CHECK(s.grad_t(x).d[0].t11 == doctest::Approx(3.0 * t.grad_t(x).d[0].t11).epsilon(1e-14));
    }
}

TEST_CASE("bumps touching the boundary are rejected") {
    CHECK_THROWS_AS(field({{{1.8, 0.0}, 0.3, 0.1}}), AdmissibilityError);
    CHECK_THROWS_AS(field({{{0.0, 0.0}, 0.0, 0.1}}), AdmissibilityError);
}

TEST_CASE("admissibility report for zero stress") {
    const AdmissibilityReport r = verify_admissible(ResidualStressField(), {1.0, 1.0}, 2.0, 20);
    CHECK(r.symmetry_ok);
    CHECK(r.divfree_max_residual == 0.0);
    CHECK(r.boundary_traction_max == 0.0);
    CHECK(r.min_convexity_over_samples == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.min_ellipticity_over_samples == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.admissible());
}

TEST_CASE("amplitude 0.1 keeps convexity") {
    const AdmissibilityReport r = verify_admissible(field({{{0.5, 0.0}, 0.3, 0.1}}), {1.0, 1.0}, 2.0, 50);
    CHECK(r.min_convexity_over_samples > 0.0);
    CHECK(r.divfree_max_residual <= 1e-8);
    CHECK(r.boundary_traction_max == 0.0);
    CHECK(r.admissible());
}

TEST_CASE("default amplitude keeps convexity and rank-one ellipticity") {
    const AdmissibilityReport r = verify_admissible(field({AiryBump{}}), {1.0, 1.0}, 2.0, 50);
    CHECK(r.admissible());
    CHECK(r.min_convexity_over_samples > 0.0);
    CHECK(r.min_ellipticity_over_samples > 0.0);
}

TEST_CASE("amplitude 1000 destroys convexity") {
    const ResidualStressField t = field({{{0.5, 0.0}, 0.3, 1000.0}});
    const AdmissibilityReport r = verify_admissible(t, {1.0, 1.0}, 2.0, 50);
    CHECK(r.min_convexity_over_samples < 0.0);
    CHECK_FALSE(r.admissible());
    // Witness: eps = e1 x e1 gives lambda + 2 mu + t11, negative where t11 < -3.
    double worst = 1e300;
    for (int a = 0; a < 50; ++a)
        for (int b = 0; b < 50; ++b) worst = std::min(worst, 3.0 + t.t({0.2 + 0.6 * a / 49, -0.3 + 0.6 * b / 49}).t11);
    CHECK(worst < 0.0);
}

TEST_CASE("ellipticity margin equals a brute-force rank-one minimum") {
    const ResidualStressField t = field({{{0.5, 0.0}, 0.3, 0.1}});
    const IsotropicModuli base{1.0, 1.0};
    const AdmissibilityReport r = verify_admissible(t, base, 2.0, 30);
    double brute = 1e300;
    const int n = 30;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Point2 x(-2.0 + 4.0 * a / (n - 1), -2.0 + 4.0 * b / (n - 1));
            if (x.norm() > 2.0) continue;
            const ElasticTensor4 c = make_isotropic_residual(base, t.t(x).matrix(), 2);
            for (int p = 0; p < 90; ++p)
                for (int q = 0; q < 90; ++q) {
                    const double th = M_PI * p / 90, ph = M_PI * q / 90;
                    const double av[2] = {std::cos(th), std::sin(th)}, bv[2] = {std::cos(ph), std::sin(ph)};
                    double f = 0.0;
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < 2; ++j)
                            for (int k = 0; k < 2; ++k)
                                for (int l = 0; l < 2; ++l) f += c(i, j, k, l) * av[i] * bv[j] * av[k] * bv[l];
                    brute = std::min(brute, f);
                }
        }
    CHECK(r.min_ellipticity_over_samples <= brute + 1e-12);
    CHECK(r.min_ellipticity_over_samples == doctest::Approx(brute).epsilon(1e-3));
    CHECK(r.min_ellipticity_over_samples < 0.0); // amplitude 0.1 is convex but not rank-one elliptic
}
