#include "doctest.h"

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "nearcloak/errors.hpp"
#include "nearcloak/potentials.hpp"

using namespace nearcloak;

namespace {

using big = boost::multiprecision::cpp_bin_float_100;

struct BesselRef {
    double j0, y0, j1, y1;
};

// Ascending series in 100-digit arithmetic; cancellation at z = 50 costs about 22 digits.
BesselRef bessel_series(double zd) {
    const big z(zd), q = z * z / 4, gamma = boost::math::constants::euler<big>(), pi = boost::math::constants::pi<big>();
    big j0 = 0, j1 = 0, s0 = 0, s1 = 0;
    big term0 = 1;     // (-1)^m q^m / (m!)^2
    big term1 = z / 2; // (-1)^m (z/2)^{2m+1} / (m! (m+1)!)
    big hm = 0;        // harmonic number H_m
    for (int m = 0; m < 400; ++m) {
        const big hm1 = hm + big(1) / (m + 1);
        j0 += term0;
        j1 += term1;
        s0 -= term0 * hm;         // (-1)^{m+1} H_m q^m / (m!)^2
        s1 += term1 * (hm + hm1); // (-1)^m (H_m + H_{m+1}) ...
        if (m > 10 && abs(term0) < 1e-60 && abs(term1) < 1e-60) break;
        term0 *= -q / ((m + 1) * (m + 1));
        term1 *= -q / ((m + 1) * (m + 2));
        hm = hm1;
    }
    const big lg = log(z / 2) + gamma;
    const big y0 = 2 / pi * (lg * j0 + s0);
    const big y1 = 2 / pi * lg * j1 - 2 / (pi * z) - s1 / pi;
    return {static_cast<double>(j0), static_cast<double>(y0), static_cast<double>(j1), static_cast<double>(y1)};
}

SmallVector v2(double a, double b) {
    SmallVector v(2);
    v << a, b;
    return v;
}

SmallVector v3(double a, double b, double c) {
    SmallVector v(3);
    v << a, b, c;
    return v;
}

double rel(const Eigen::Vector2cd &a, const Eigen::Vector2cd &b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

} // namespace

TEST_CASE("series oracle agrees with known Bessel values") {
    const BesselRef r = bessel_series(1.0);
    CHECK(r.j0 == doctest::Approx(0.7651976865579666).epsilon(1e-15));
    CHECK(r.y0 == doctest::Approx(0.08825696421567696).epsilon(1e-14));
    CHECK(r.j1 == doctest::Approx(0.4400505857449335).epsilon(1e-15));
    CHECK(r.y1 == doctest::Approx(-0.7812128213002887).epsilon(1e-15));
}

TEST_CASE("Hankel functions match the arbitrary-precision oracle on [1e-3, 50]") {
    double worst0 = 0.0, worst1 = 0.0;
    std::vector<double> zs;
    for (int k = 0; k <= 240; ++k) zs.push_back(1e-3 * std::pow(5e4, k / 240.0));
    for (double z : {15.99, 16.0, 16.01, 7.99, 8.0, 8.01}) zs.push_back(z);
    for (double z : zs) {
        const BesselRef r = bessel_series(z);
        const Complex h0(r.j0, r.y0), h1(r.j1, r.y1);
        worst0 = std::max(worst0, std::abs(hankel1_0(z) - h0) / std::abs(h0));
        worst1 = std::max(worst1, std::abs(hankel1_1(z) - h1) / std::abs(h1));
    }
    MESSAGE("worst relative Hankel errors: " << worst0 << ", " << worst1);
    CHECK(worst0 <= 1e-10);
    CHECK(worst1 <= 1e-10);
    CHECK_THROWS_AS(hankel1_0(0.0), DomainError);
}

TEST_CASE("2D fundamental solution satisfies the Helmholtz equation") {
    const double k = 1.3, hs = 1e-3;
    const SmallVector y = v2(0.1, -0.2);
    for (const SmallVector &x : {v2(1.0, 0.5), v2(-0.7, 1.4), v2(3.0, -2.0)}) {
        auto g = [&](double dx, double dy) { return fundamental_scalar(x + v2(dx, dy), y, k, 2); };
        const Complex lap = (g(hs, 0) + g(-hs, 0) + g(0, hs) + g(0, -hs) - 4.0 * g(0, 0)) / (hs * hs);
        CHECK(std::abs(lap + k * k * g(0, 0)) <= 1e-5 * k * k * std::abs(g(0, 0)));
    }
}

TEST_CASE("2D kernel follows the Hankel decay envelope") {
    const double k = 1.0;
    for (double z = 10.0; z <= 50.0; z += 2.5) {
        const double envelope = 0.25 * std::sqrt(2.0 / (M_PI * z));
        const double g = std::abs(fundamental_scalar(v2(z, 0.0), v2(0.0, 0.0), k, 2));
        // |H0|^2 = 2/(pi z) (1 + 1/(8 z^2) + ...)
        CHECK(std::abs(g / envelope - 1.0) <= 1.0 / (8.0 * z * z));
    }
}

TEST_CASE("3D kernel is the outgoing spherical wave") {
    const SmallVector x = v3(0.3, 1.0, -0.5), y = v3(0.0, 0.0, 0.1);
    const double r = (x - y).norm(), k = 2.0;
    const Complex expect = std::exp(Complex(0.0, k * r)) / (4.0 * M_PI * r);
    CHECK(std::abs(fundamental_scalar(x, y, k, 3) - expect) <= 1e-15);
    CHECK_THROWS_AS(fundamental_scalar(x, x, k, 3), DomainError);
    CHECK_THROWS_AS(fundamental_scalar(x, y, -1.0, 3), DomainError);
}

TEST_CASE("wave speeds and parameter validation") {
    const LameKernelParams p{1.0, 1.0, 1.0};
    CHECK(p.kp() == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(p.ks() == doctest::Approx(1.0));
    CHECK(p.kp() < p.ks());
    CHECK_THROWS_AS((LameKernelParams{1.0, 0.0, 1.0}.validate()), DomainError);
    CHECK_THROWS_AS((LameKernelParams{-3.0, 1.0, 1.0}.validate()), DomainError);
    CHECK_THROWS_AS((LameKernelParams{1.0, 1.0, 0.0}.validate()), DomainError);
}

TEST_CASE("Kupradze tensor is symmetric under exchange of its arguments") {
    const LameKernelParams p{1.0, 1.0, 1.0};
    const SmallVector x = v2(0.4, -1.1), y = v2(-0.3, 0.2);
    const ComplexMatrix a = kupradze_tensor(x, y, p), b = kupradze_tensor(y, x, p);
    CHECK((a - b.transpose()).norm() <= 1e-15 * a.norm());
    CHECK((a - a.transpose()).norm() <= 1e-15 * a.norm());
}

TEST_CASE("Kupradze columns satisfy the Navier equation away from the source") {
    for (int dim : {2, 3}) {
        const LameKernelParams p{1.5, 0.8, 1.2};
        const SmallVector y = dim == 2 ? v2(0.0, 0.0) : v3(0.0, 0.0, 0.0);
        for (int col = 0; col < dim; ++col) {
            const VectorField u = [&](const SmallVector &x) -> ComplexVector { return kupradze_tensor(x, y, p).col(col); };
            for (double d : {0.5, 1.0, 2.0, 5.0}) {
                SmallVector x = dim == 2 ? v2(0.6, 0.8) : v3(0.48, 0.6, 0.64);
                x *= d;
                const double res = navier_residual(u, x, p);
                CHECK(res <= 1e-4);
            }
        }
    }
}

TEST_CASE("Kupradze tensor scales as 1/c under moduli c and frequency sqrt(c)") {
    const LameKernelParams p{1.0, 1.0, 1.0}, q{3.0, 3.0, std::sqrt(3.0)};
    const SmallVector x = v2(1.0, 0.3), y = v2(-0.2, 0.1);
    CHECK((kupradze_tensor(x, y, q) * 3.0 - kupradze_tensor(x, y, p)).norm() <= 1e-13 * kupradze_tensor(x, y, p).norm());
}

TEST_CASE("analytic gradient and traction kernel match finite differences") {
    const LameKernelParams p{1.0, 0.7, 1.3};
    const SmallVector x = v2(0.2, 0.1), y = v2(1.1, -0.6), nu = v2(0.6, 0.8);
    const double hs = 1e-5;
    const auto grad = kupradze_gradient(x, y, p);
    for (int m = 0; m < 2; ++m) {
        SmallVector e = SmallVector::Zero(2);
        e[m] = hs;
        const ComplexMatrix fd = (kupradze_tensor(x + e, y, p) - kupradze_tensor(x - e, y, p)) / (2 * hs);
        CHECK((grad[static_cast<std::size_t>(m)] - fd).norm() <= 1e-7 * fd.norm());
    }
    // Traction in y of column i: lambda div I nu + mu (grad + grad^T) nu.
    const ComplexMatrix xi = traction_kernel(x, y, nu, p);
    for (int i = 0; i < 2; ++i) {
        Eigen::Matrix2cd g; // g(a, m) = d_{y_m} Pi_{a i}
        for (int m = 0; m < 2; ++m) {
            SmallVector e = SmallVector::Zero(2);
            e[m] = hs;
            g.col(m) = (kupradze_tensor(x, y + e, p).col(i) - kupradze_tensor(x, y - e, p).col(i)) / (2 * hs);
        }
        const Eigen::Vector2cd nu_c = nu.cast<Complex>();
        const Eigen::Vector2cd t = p.lambda0 * g.trace() * nu_c + p.mu0 * (g + g.transpose()) * nu_c;
        CHECK((xi.row(i).transpose() - t).norm() <= 1e-7 * t.norm());
    }
}

namespace {

const LameKernelParams kLayerParams{1.0, 1.0, 1.0};
const CircleLayer kUnit{};

Eigen::Vector2cd smooth_density(double th) { return {Complex(std::cos(th), 0.3 * std::sin(2 * th)), 0.5 + std::sin(th)}; }

} // namespace

TEST_CASE("zero density gives zero layer potentials") {
    auto zero = [](double) { return Eigen::Vector2cd::Zero().eval(); };
    CHECK(single_layer_eval(kUnit, zero, {2.0, 0.0}, kLayerParams, 64).norm() == 0.0);
    CHECK(double_layer_eval(kUnit, zero, {0.0, 0.3}, kLayerParams, 64).norm() == 0.0);
}

TEST_CASE("layer quadrature is stable under doubling at distance 0.5") {
    for (const Eigen::Vector2d &x : {Eigen::Vector2d(1.5, 0.0), Eigen::Vector2d(0.0, 0.5), Eigen::Vector2d(-2.0, 1.0)}) {
        const auto s1 = single_layer_eval(kUnit, smooth_density, x, kLayerParams, 128);
        const auto s2 = single_layer_eval(kUnit, smooth_density, x, kLayerParams, 256);
        const auto d1 = double_layer_eval(kUnit, smooth_density, x, kLayerParams, 128);
        const auto d2 = double_layer_eval(kUnit, smooth_density, x, kLayerParams, 256);
        CHECK(rel(s1, s2) <= 1e-8);
        CHECK(rel(d1, d2) <= 1e-8);
    }
}

TEST_CASE("layer quadrature converges spectrally") {
    const Eigen::Vector2d x(1.6, 0.0); // distance 0.6: admissible from 32 nodes on
    for (bool dbl : {false, true}) {
        auto eval = [&](int n) {
            return dbl ? double_layer_eval(kUnit, smooth_density, x, kLayerParams, n)
                       : single_layer_eval(kUnit, smooth_density, x, kLayerParams, n);
        };
        const auto ref = eval(1024);
        double prev = rel(eval(32), ref);
        CHECK(prev > 1e-10); // the first level is above the floor, so a rate is observed
        for (int n = 64; n <= 256; n *= 2) {
            const double err = rel(eval(n), ref);
            MESSAGE((dbl ? "double" : "single") << " layer n = " << n << ": " << err);
            if (prev > 1e-10) CHECK(err <= std::max(prev / 10.0, 1e-10));
            prev = err;
        }
        CHECK(prev <= 1e-10);
    }
}

TEST_CASE("layer potentials solve the Navier equation off the circle") {
    for (const Eigen::Vector2d &x : {Eigen::Vector2d(1.8, 0.2), Eigen::Vector2d(0.1, -0.3)}) {
        for (bool dbl : {false, true}) {
            const VectorField u = [&](const SmallVector &p) -> ComplexVector {
                const Eigen::Vector2d q(p[0], p[1]);
                return dbl ? double_layer_eval(kUnit, smooth_density, q, kLayerParams, 256)
                           : single_layer_eval(kUnit, smooth_density, q, kLayerParams, 256);
            };
            CHECK(navier_residual(u, v2(x.x(), x.y()), kLayerParams) <= 1e-4);
        }
    }
}

TEST_CASE("single layer decays like 1/sqrt(|x|)") {
    auto mag = [](double r) { return single_layer_eval(kUnit, smooth_density, {r * 0.6, r * 0.8}, kLayerParams, 128).norm(); };
    const double c = mag(100.0) * std::sqrt(100.0);
    CHECK(c > 0.0);
    for (double r : {200.0, 400.0, 800.0}) CHECK(mag(r) <= 1.5 * c / std::sqrt(r));
}

TEST_CASE("targets too close to the layer are rejected") {
    CHECK_THROWS_AS(single_layer_eval(kUnit, smooth_density, {1.01, 0.0}, kLayerParams, 64), DomainError);
    CHECK_THROWS_AS(double_layer_eval(kUnit, smooth_density, {0.99, 0.0}, kLayerParams, 64), DomainError);
    CHECK_THROWS_AS(single_layer_eval(kUnit, smooth_density, {3.0, 0.0}, kLayerParams, 2), DomainError);
}

TEST_CASE("layer continuity off the circle") {
    const Eigen::Vector2d x(1.6, 0.7), e(1e-6, -2e-6);
    const auto a = single_layer_eval(kUnit, smooth_density, x, kLayerParams, 128);
    const auto b = single_layer_eval(kUnit, smooth_density, x + e, kLayerParams, 128);
    CHECK(rel(a, b) <= 1e-5);
}
