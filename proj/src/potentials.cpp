#include "nearcloak/potentials.hpp"

#include <cmath>
#include <string>

#include "nearcloak/errors.hpp"

namespace nearcloak {

namespace {

constexpr double kCrossover = 16.0;
constexpr long double kEulerGamma = 0.577215664901532860606512090082402431L;
constexpr long double kPiL = 3.141592653589793238462643383279502884L;

/// J_n and Y_n (n = 0, 1) by their ascending series, in long double.
void bessel_series(int n, long double z, long double &j, long double &y) {
    const long double q = -0.25L * z * z;
    const long double half = 0.5L * z;
    const long double lead = n == 0 ? 1.0L : half; // (z/2)^n / n!

    // term_k = (-z^2/4)^k / (k! (k+n)!) (times (z/2)^n), psi(k+1) + psi(k+n+1).
    long double term = lead;
    long double psi_k = -kEulerGamma;                       // psi(k+1)
    long double psi_kn = n == 0 ? psi_k : 1.0L - kEulerGamma; // psi(k+n+1)
    long double sum_j = 0.0L, sum_y = 0.0L;
    for (int k = 0; k < 400; ++k) {
        sum_j += term;
        sum_y += (psi_k + psi_kn) * term;
        const long double next = term * q / (static_cast<long double>(k + 1) * static_cast<long double>(k + 1 + n));
        psi_k += 1.0L / (k + 1);
        psi_kn += 1.0L / (k + 1 + n);
        term = next;
        if (k > 2 && std::fabs(term) * (1.0L + std::fabs(psi_k + psi_kn)) < 1e-22L * (std::fabs(sum_j) + std::fabs(sum_y)))
            break;
    }
    j = sum_j;
    const long double log_term = (2.0L / kPiL) * std::log(half) * j;
    y = log_term - sum_y / kPiL;
    if (n == 1) y -= 2.0L / (kPiL * z);
}

Complex hankel_asymptotic(int nu, double z) {
    const double mu = 4.0 * nu * nu;
    Complex sum(1.0, 0.0), ik(1.0, 0.0);
    double a = 1.0, last = 1.0;
    for (int k = 1; k < 60; ++k) {
        a *= (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * z);
        ik *= Complex(0.0, 1.0);
        const double mag = std::abs(a);
        if (mag > last) break;
        sum += ik * a;
        last = mag;
        if (mag < 1e-18) break;
    }
    const double phase = z - nu * M_PI / 2.0 - M_PI / 4.0;
    return std::sqrt(2.0 / (M_PI * z)) * std::exp(Complex(0.0, phase)) * sum;
}

Complex hankel(int n, double z) {
    if (!(z > 0.0)) throw DomainError("Hankel functions need z > 0");
    if (z >= kCrossover) return hankel_asymptotic(n, z);
    long double j, y;
    bessel_series(n, static_cast<long double>(z), j, y);
    return {static_cast<double>(j), static_cast<double>(y)};
}

/// g(r) and its first three radial derivatives.
struct Radial {
    Complex g, g1, g2, g3;
};

Radial helmholtz_radial(double r, double k, int dim) {
    Radial f;
    if (dim == 2) {
        f.g = Complex(0.0, 0.25) * hankel(0, k * r);
        f.g1 = Complex(0.0, -0.25) * k * hankel(1, k * r);
        f.g2 = -f.g1 / r - k * k * f.g;
        f.g3 = -f.g2 / r + f.g1 / (r * r) - k * k * f.g1;
    } else {
        f.g = std::exp(Complex(0.0, k * r)) / (4.0 * M_PI * r);
        f.g1 = f.g * Complex(-1.0 / r, k);
        f.g2 = -2.0 * f.g1 / r - k * k * f.g;
        f.g3 = -2.0 * f.g2 / r + 2.0 * f.g1 / (r * r) - k * k * f.g1;
    }
    return f;
}

Radial operator-(const Radial &a, const Radial &b) { return {a.g - b.g, a.g1 - b.g1, a.g2 - b.g2, a.g3 - b.g3}; }

struct KernelSetup {
    int dim;
    double r;
    SmallVector e;
    Radial gs, diff; // G_ks and G_ks - G_kp
};

KernelSetup setup(const SmallVector &x, const SmallVector &y, const LameKernelParams &p) {
    p.validate();
    if (x.size() != y.size() || (x.size() != 2 && x.size() != 3)) throw DomainError("points must share dimension 2 or 3");
    KernelSetup s;
    s.dim = static_cast<int>(x.size());
    const SmallVector d = x - y;
    s.r = d.norm();
    if (s.r == 0.0) throw DomainError("kernel is singular at x = y");
    s.e = d / s.r;
    s.gs = helmholtz_radial(s.r, p.ks(), s.dim);
    s.diff = s.gs - helmholtz_radial(s.r, p.kp(), s.dim);
    return s;
}

} // namespace

double LameKernelParams::kp() const { return eta / std::sqrt(lambda0 + 2.0 * mu0); }

double LameKernelParams::ks() const { return eta / std::sqrt(mu0); }

void LameKernelParams::validate() const {
    if (!(mu0 > 0.0 && lambda0 + 2.0 * mu0 > 0.0)) throw DomainError("Lame moduli need mu > 0 and lambda + 2 mu > 0");
    if (!(eta > 0.0)) throw DomainError("frequency eta must be positive");
}

Complex hankel1_0(double z) { return hankel(0, z); }

Complex hankel1_1(double z) { return hankel(1, z); }

Complex fundamental_scalar(const SmallVector &x, const SmallVector &y, double k, int dim) {
    if (dim != 2 && dim != 3) throw DomainError("dimension must be 2 or 3");
    if (x.size() != dim || y.size() != dim) throw DomainError("point dimension mismatch");
    if (!(k > 0.0)) throw DomainError("wavenumber must be positive");
    const double r = (x - y).norm();
    if (r == 0.0) throw DomainError("fundamental solution is singular at x = y");
    return helmholtz_radial(r, k, dim).g;
}

ComplexMatrix kupradze_tensor(const SmallVector &x, const SmallVector &y, const LameKernelParams &params) {
    const KernelSetup s = setup(x, y, params);
    const Complex a = s.diff.g2 - s.diff.g1 / s.r, b = s.diff.g1 / s.r;
    const double inv_eta2 = 1.0 / (params.eta * params.eta);
    ComplexMatrix pi(s.dim, s.dim);
    for (int i = 0; i < s.dim; ++i)
        for (int j = 0; j < s.dim; ++j) {
            const double dij = i == j ? 1.0 : 0.0;
            pi(i, j) = s.gs.g * dij / params.mu0 + inv_eta2 * (a * s.e[i] * s.e[j] + b * dij);
        }
    return pi;
}

std::array<ComplexMatrix, 3> kupradze_gradient(const SmallVector &x, const SmallVector &y, const LameKernelParams &params) {
    const KernelSetup s = setup(x, y, params);
    const Radial &g = s.diff;
    const double r = s.r;
    const Complex a = g.g2 - g.g1 / r;
    const Complex da = g.g3 - g.g2 / r + g.g1 / (r * r);
    const Complex db = g.g2 / r - g.g1 / (r * r);
    const double inv_eta2 = 1.0 / (params.eta * params.eta);
    std::array<ComplexMatrix, 3> out;
    for (int m = 0; m < s.dim; ++m) {
        out[m] = ComplexMatrix(s.dim, s.dim);
        for (int i = 0; i < s.dim; ++i)
            for (int j = 0; j < s.dim; ++j) {
                const double dij = i == j ? 1.0 : 0.0, dim_ = i == m ? 1.0 : 0.0, djm = j == m ? 1.0 : 0.0;
                const Complex third = (da - 2.0 * a / r) * s.e[i] * s.e[j] * s.e[m] + (a / r) * (dim_ * s.e[j] + djm * s.e[i])
                                    + db * dij * s.e[m];
                out[m](i, j) = s.gs.g1 * s.e[m] * dij / params.mu0 + inv_eta2 * third;
            }
    }
    return out;
}

ComplexMatrix traction_kernel(const SmallVector &x, const SmallVector &y, const SmallVector &nu,
                              const LameKernelParams &params) {
    const int dim = static_cast<int>(x.size());
    if (nu.size() != dim) throw DomainError("normal dimension mismatch");
    const auto grad = kupradze_gradient(x, y, params);
    ComplexMatrix xi(dim, dim);
    for (int i = 0; i < dim; ++i) {
        // v_a(y) = Pi_ai(x, y); d/dy = -d/dx.
        auto dv = [&](int m, int a) { return -grad[m](a, i); };
        Complex div(0.0, 0.0);
        for (int a = 0; a < dim; ++a) div += dv(a, a);
        for (int k = 0; k < dim; ++k) {
            Complex t = params.lambda0 * div * nu[k];
            for (int m = 0; m < dim; ++m) t += params.mu0 * (dv(m, k) + dv(k, m)) * nu[m];
            xi(i, k) = t;
        }
    }
    return xi;
}

namespace {

template <class Kernel>
Eigen::Vector2cd layer_eval(const CircleLayer &layer, const LayerDensity &psi, const Eigen::Vector2d &x, int n_quad,
                            Kernel &&kernel) {
    if (n_quad < 3) throw DomainError("layer quadrature needs at least 3 nodes");
    const double spacing = 2.0 * M_PI * layer.radius / n_quad;
    if (std::abs((x - layer.center).norm() - layer.radius) < 3.0 * spacing)
        throw DomainError("target point is within three quadrature spacings of the layer");
    Eigen::Vector2cd sum = Eigen::Vector2cd::Zero();
    for (int q = 0; q < n_quad; ++q) {
        const double th = 2.0 * M_PI * q / n_quad;
        const Eigen::Vector2d nu(std::cos(th), std::sin(th));
        const Eigen::Vector2d y = layer.center + layer.radius * nu;
        const ComplexMatrix k = kernel(SmallVector(x), SmallVector(y), SmallVector(nu));
        sum += Eigen::Matrix2cd(k) * psi(th);
    }
    return spacing * sum;
}

} // namespace

Eigen::Vector2cd single_layer_eval(const CircleLayer &layer, const LayerDensity &psi, const Eigen::Vector2d &x,
                                   const LameKernelParams &params, int n_quad) {
    return layer_eval(layer, psi, x, n_quad, [&](const SmallVector &a, const SmallVector &b, const SmallVector &) {
        return kupradze_tensor(a, b, params);
    });
}

Eigen::Vector2cd double_layer_eval(const CircleLayer &layer, const LayerDensity &psi, const Eigen::Vector2d &x,
                                   const LameKernelParams &params, int n_quad) {
    return layer_eval(layer, psi, x, n_quad, [&](const SmallVector &a, const SmallVector &b, const SmallVector &nu) {
        return traction_kernel(a, b, nu, params);
    });
}

double navier_residual(const VectorField &u, const SmallVector &x, const LameKernelParams &params, double step) {
    const int dim = static_cast<int>(x.size());
    const ComplexVector u0 = u(x);
    auto shifted = [&](int a, double sa, int b, double sb) {
        SmallVector p = x;
        p[a] += sa;
        p[b] += sb;
        return u(p);
    };
    // Second partials d_a d_b u by central differences.
    std::array<std::array<ComplexVector, 3>, 3> d2;
    const double h = step;
    for (int a = 0; a < dim; ++a) {
        d2[a][a] = (shifted(a, h, a, 0.0) - 2.0 * u0 + shifted(a, -h, a, 0.0)) / (h * h);
        for (int b = a + 1; b < dim; ++b) {
            d2[a][b] = (shifted(a, h, b, h) - shifted(a, h, b, -h) - shifted(a, -h, b, h) + shifted(a, -h, b, -h)) / (4.0 * h * h);
            d2[b][a] = d2[a][b];
        }
    }
    ComplexVector lap = ComplexVector::Zero(dim), grad_div = ComplexVector::Zero(dim);
    for (int a = 0; a < dim; ++a) {
        lap += d2[a][a];
        for (int b = 0; b < dim; ++b) grad_div[a] += d2[a][b][b];
    }
    const ComplexVector t1 = params.mu0 * lap, t2 = (params.lambda0 + params.mu0) * grad_div,
                        t3 = params.eta * params.eta * u0;
    const double scale = t1.norm() + t2.norm() + t3.norm();
    return scale == 0.0 ? 0.0 : (t1 + t2 + t3).norm() / scale;
}

} // namespace nearcloak
