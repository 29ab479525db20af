#include "doctest.h"

#include <random>
#include <sstream>

#include "nearcloak/errors.hpp"
#include "nearcloak/ntd.hpp"
#include "nearcloak/transform.hpp"

using namespace nearcloak;

namespace {

ResidualStressField default_t() {
    AiryPotential phi;
    phi.bumps = {AiryBump{}};
    return airy_to_stress(phi);
}

CloakConfig base_config(double h) {
    CloakConfig c;
    c.h = h;
    c.t = default_t();
    return c;
}

double max_abs_diff(const ElasticTensor4 &a, const ElasticTensor4 &b) {
    double d = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) d = std::max(d, std::abs(a(i, j, k, l) - b(i, j, k, l)));
    return d;
}

} // namespace

TEST_CASE("traction basis layout and normalization") {
    const TractionBasis b(8);
    CHECK(b.size() == 34);
    CHECK(b.mode(0) == 0);
    CHECK(b.mode(1) == 0);
    CHECK(b.mode(2) == 1);
    CHECK(b.mode(33) == 8);
    // Unit L2 norm on the circle of radius 2: constant magnitude 1/sqrt(4 pi) for n = 0.
    CHECK(b.eval(0, 0.3).norm() == doctest::Approx(1.0 / std::sqrt(4.0 * M_PI)).epsilon(1e-14));
    // Field 2 is cos(th) e_r.
    const Eigen::Vector2d v = b.eval(2, 0.0);
    CHECK(v.y() == doctest::Approx(0.0));
    CHECK(v.x() == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-14));
    CHECK_THROWS(TractionBasis(-1));
}

TEST_CASE("discrete Gram matrix is diagonal") {
    const TractionBasis b(8);
    const FeSpace space(concentric_disc_mesh({}, 2.0, 0.1), ElementOrder::Quadratic);
    const Eigen::MatrixXd g = gram_matrix(b, space);
    const double diag = g.diagonal().cwiseAbs().maxCoeff();
    Eigen::MatrixXd off = g;
    off.diagonal().setZero();
    CHECK(off.cwiseAbs().maxCoeff() <= 1e-8 * diag);
    CHECK(g.diagonal().minCoeff() == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("virtual media: shell scale, shell density and pulled-back core") {
    CloakConfig c = base_config(0.2);
    c.t = ResidualStressField();
    const MediumSpec m = build_cloaked_medium(c, CloakSpace::Virtual);
    const Point2 in_shell(0.15, 0.0), in_core(0.02, 0.03);
    const ElasticTensor4 c0 = make_isotropic(c.moduli, 2);
    CHECK(max_abs_diff(m.phase(region::kShell).tensor(in_shell), 0.008 * c0) <= 1e-15);
    CHECK(m.phase(region::kShell).density(in_shell) == Complex(1.0, 1.0));
    // Isotropic 2D tensors are invariant under the conformal scaling y -> h y; the density gains 1/h^2.
    const ElasticTensor4 target = make_isotropic({2.0 * c.moduli.lambda, 3.0 * c.moduli.mu}, 2);
    CHECK(max_abs_diff(m.phase(region::kCore).tensor(in_core), target) <= 1e-12);
    CHECK(std::abs(m.phase(region::kCore).density(in_core) - Complex(2.0 / 0.04, 0.0)) <= 1e-12);
    CHECK(max_abs_diff(m.phase(region::kOuter).tensor({1.5, 0.2}), c0) == 0.0);
}

TEST_CASE("physical outer medium is the push-forward of the background") {
    const CloakConfig c = base_config(0.2);
    const MediumSpec m = build_cloaked_medium(c, CloakSpace::Physical);
    for (const Point2 &y : {Point2(1.3, 0.2), Point2(-0.4, 1.5), Point2(0.1, -1.9)}) {
        SmallVector ys(2);
        ys << y.x(), y.y();
        const SmallVector x = fh_inverse(ys, c.h);
        SmallMatrix jac(2, 2);
        const double hs = 1e-6;
        for (int col = 0; col < 2; ++col) {
            SmallVector e = SmallVector::Zero(2);
            e[col] = hs;
            jac.col(col) = (fh(x + e, c.h) - fh(x - e, c.h)) / (2 * hs);
        }
        const ElasticTensor4 c0 = make_isotropic_residual(c.moduli, c.t.t({x[0], x[1]}).matrix(), 2);
        const ElasticTensor4 expect = push_forward_tensor(c0, JacobianSample(jac));
        CHECK(max_abs_diff(m.phase(region::kOuter).tensor(y), expect) <= 1e-6);
        CHECK(std::abs(m.phase(region::kOuter).density(y) - 1.0 / jac.determinant()) <= 1e-6);
    }
}

TEST_CASE("lossless target and shell parameters are rejected") {
    CloakConfig c = base_config(0.2);
    c.beta = 0.0;
    CHECK_THROWS_AS(build_cloaked_medium(c, CloakSpace::Virtual), ConfigError);
    c = base_config(0.6);
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("homogeneous NtD map equals the reference and is symmetric") {
    const TractionBasis b(4);
    const FeSpace space(concentric_disc_mesh({}, 2.0, 0.15), ElementOrder::Quadratic);
    const IsotropicModuli mod{1.0, 1.0};
    const ResidualStressField t = default_t();
    const NtDMatrix ref = reference_ntd(b, space, mod, t, 1.0);
    const NtDMatrix direct = ntd_matrix(homogeneous_medium(mod, t), b, space, 1.0);
    CHECK((ref.entries - direct.entries).norm() <= 1e-12 * ref.entries.norm());
    CHECK((ref.entries - ref.entries.transpose()).norm() <= 1e-6 * ref.entries.norm());
    CHECK(ref.entries.imag().norm() == 0.0);
    CHECK(ref.modes == b.modes());

    // T = 0 through the general assembler with an explicit isotropic phase.
    MediumSpec iso;
    iso.regions[0] = constant_phase(make_isotropic(mod, 2), 1.0);
    const NtDMatrix plain = ntd_matrix(iso, b, space, 1.0);
    const NtDMatrix ref0 = reference_ntd(b, space, mod, ResidualStressField(), 1.0);
    CHECK((plain.entries - ref0.entries).norm() <= 1e-12 * ref0.entries.norm());
}

TEST_CASE("NtD blocks of different angular modes decouple for T = 0") {
    const TractionBasis b(4);
    const FeSpace space(concentric_disc_mesh({}, 2.0, 0.05), ElementOrder::Quadratic);
    const NtDMatrix ref = reference_ntd(b, space, {1.0, 1.0}, ResidualStressField(), 1.0);
    double cross = 0.0, diag = 0.0;
    for (int i = 0; i < b.size(); ++i)
        for (int j = 0; j < b.size(); ++j) {
            const double v = std::abs(ref.entries(i, j));
            if (b.mode(i) == b.mode(j)) diag = std::max(diag, v);
            else cross = std::max(cross, v);
        }
    CHECK(cross <= 1e-3 * diag);
}

TEST_CASE("low-mode entries are stable when the basis is enlarged") {
    const FeSpace space(concentric_disc_mesh({}, 2.0, 0.12), ElementOrder::Quadratic);
    const NtDMatrix small = reference_ntd(TractionBasis(4), space, {1.0, 1.0}, default_t(), 1.0);
    const NtDMatrix large = reference_ntd(TractionBasis(8), space, {1.0, 1.0}, default_t(), 1.0);
    const int n = TractionBasis(2).size();
    const Eigen::MatrixXcd a = small.entries.topLeftCorner(n, n), c = large.entries.topLeftCorner(n, n);
    CHECK((a - c).cwiseAbs().maxCoeff() <= 1e-2 * c.cwiseAbs().maxCoeff());
}

TEST_CASE("Sobolev operator norm") {
    const TractionBasis b(1);
    const auto modes = b.modes();
    const int n = b.size();
    CHECK(sobolev_operator_norm(Eigen::MatrixXcd::Zero(n, n), modes) == 0.0);
    CHECK(sobolev_operator_norm(Eigen::MatrixXcd::Identity(n, n), modes) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    const TractionBasis b4(4);
    const int m = b4.size();
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXcd a(m, m), c(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                a(i, j) = Complex(g(rng), g(rng));
                c(i, j) = Complex(g(rng), g(rng));
            }
        const double na = sobolev_operator_norm(a, b4.modes()), nc = sobolev_operator_norm(c, b4.modes());
        CHECK(sobolev_operator_norm(a + c, b4.modes()) <= na + nc + 1e-12);
        const Complex s(-2.5, 1.5);
        CHECK(std::abs(sobolev_operator_norm(s * a, b4.modes()) - std::abs(s) * na) <= 1e-14 * std::abs(s) * na);
    }
    // Diagonal with mass on n >= 1: weighting only increases the norm.
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(m, m);
    for (int i = 0; i < m; ++i)
        if (b4.mode(i) >= 1) d(i, i) = 1.0 / (1 + i);
    CHECK(sobolev_operator_norm(d, b4.modes()) >= plain_operator_norm(d));
    CHECK_THROWS(sobolev_operator_norm(d, modes));
}

TEST_CASE("identical media on identical meshes give identical maps") {
    const TractionBasis b(3);
    const FeSpace space = cloak_space(0.4, CloakSpace::Virtual, {0.19, ElementOrder::Quadratic, std::nullopt, 2'000'000});
    const MediumSpec m = build_cloaked_medium(base_config(0.4), CloakSpace::Virtual);
    const NtDMatrix a = ntd_matrix(m, b, space, 1.0), c = ntd_matrix(m, b, space, 1.0);
    CHECK(sobolev_operator_norm(Eigen::MatrixXcd(a.entries - c.entries), a.modes) <= 1e-12 * sobolev_operator_norm(c));
    CHECK(a.indicator > kResonanceThreshold);
}

TEST_CASE("mesh budget") {
    MeshOptions opts;
    opts.h_mesh = 0.2;
    opts.max_dofs = 100;
    CHECK_THROWS_AS(cloak_space(0.4, CloakSpace::Virtual, opts), MeshError);
    CHECK(cloak_radii(0.2, CloakSpace::Virtual) == std::vector<double>{0.1, 0.2});
    CHECK(cloak_radii(0.2, CloakSpace::Physical) == std::vector<double>{0.5, 1.0});
}

TEST_CASE("seeded targets") {
    const TargetSpec d = TargetSpec::seeded(0);
    CHECK(d.lambda_scale == 2.0);
    CHECK(d.mu_scale == 3.0);
    CHECK(d.density == 2.0);
    const TargetSpec a = TargetSpec::seeded(11), b = TargetSpec::seeded(11);
    CHECK(a.density == b.density);
    CHECK(a.lambda_scale >= 1.0);
    CHECK(a.lambda_scale <= 3.0);
    CHECK(a.mu_scale >= 1.5);
    CHECK(a.mu_scale <= 4.5);
    CHECK(a.density >= 1.0);
    CHECK(a.density <= 3.0);
}

TEST_CASE("log-log slope and anchored grids") {
    CHECK(*loglog_slope({0.4, 0.2, 0.1}, {0.16, 0.04, 0.01}) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK_FALSE(loglog_slope({0.4}, {1.0}).has_value());
    const auto grid = anchored_density_grid(3.7, 20);
    CHECK(grid.size() == 20);
    CHECK(grid[9] == 3.7);
    CHECK(grid[19] == doctest::Approx(7.4));
    for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] > grid[k - 1]);
}

TEST_CASE("single-h study has no slope and writes its CSV") {
    const StudyResult s = convergence_study(base_config(0.4), {0.4}, TractionBasis(2),
                                            {0.19, ElementOrder::Quadratic, std::nullopt, 2'000'000});
    REQUIRE(s.rows.size() == 1);
    CHECK_FALSE(s.slope.has_value());
    CHECK(s.rows[0].norm_diff > 0.0);
    CHECK(std::isnan(s.rows[0].slope_running));
    std::ostringstream out;
    write_study_csv(out, s);
    CHECK(out.str().rfind("h,n_max,h_mesh,norm_diff,slope_running,wall_time_s", 0) == 0);
}

TEST_CASE("energy ratio is finite for a radial mode-1 traction") {
    const TractionBasis b(2);
    const CloakConfig c = base_config(0.4);
    const FeSpace space = cloak_space(0.4, CloakSpace::Virtual, {0.15, ElementOrder::Quadratic, std::nullopt, 2'000'000});
    const EnergyReport r = energy_inequality_check(c, {2}, b, space);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].mode == 1);
    CHECK(std::isfinite(r.max_ratio));
    CHECK(r.max_ratio > 0.0);
    CHECK(r.rows[0].lhs > 0.0);
    CHECK(r.rows[0].phi_norm == doctest::Approx(std::sqrt(1.0 / std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("lossy transmission problems never resonate") {
    ScanOptions opts;
    opts.mesh.h_mesh = 0.15;
    const auto cells = resonance_scan({0.5, 1.0, 2.0, 4.0}, {0.5, 1.0, 2.0, 4.0}, {1.0, 1.0}, default_t(), true, opts);
    CHECK(cells.size() == 16);
    for (const ScanCell &c : cells) {
        CHECK(c.with_lossy);
        CHECK(c.indicator > 0.0);
    }
    std::ostringstream out;
    write_scan_csv(out, cells);
    CHECK(out.str().rfind("rho0,rho1,indicator,with_lossy", 0) == 0);
}
