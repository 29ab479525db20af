#include "nearcloak/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nearcloak/errors.hpp"

namespace nearcloak {

namespace {

void require_dim(int dim) {
    if (dim != 2 && dim != 3)
        throw DomainError("tensor dimension must be 2 or 3, got " + std::to_string(dim));
}

double delta(int a, int b) { return a == b ? 1.0 : 0.0; }

std::vector<std::pair<int, int>> voigt_pairs(int dim) {
    if (dim == 2) return {{0, 0}, {1, 1}, {0, 1}};
    return {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
}

} // namespace

ElasticTensor4::ElasticTensor4(int dim) : m_dim(dim) { require_dim(dim); }

double ElasticTensor4::max_abs() const {
    double m = 0.0;
    for (double v : m_c) m = std::max(m, std::abs(v));
    return m;
}

ElasticTensor4 &ElasticTensor4::operator*=(double s) {
    for (double &v : m_c) v *= s;
    return *this;
}

ElasticTensor4 &ElasticTensor4::operator+=(const ElasticTensor4 &b) {
    if (b.m_dim != m_dim) throw DomainError("tensor dimension mismatch");
    for (std::size_t n = 0; n < m_c.size(); ++n) m_c[n] += b.m_c[n];
    return *this;
}

ElasticTensor4 make_isotropic_residual(const IsotropicModuli &moduli, const SmallMatrix &t, int dim) {
    require_dim(dim);
    if (t.rows() != dim || t.cols() != dim)
        throw AdmissibilityError("residual stress must be a dim x dim matrix");
    const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
    for (int j = 0; j < dim; ++j)
        for (int l = j + 1; l < dim; ++l)
            if (std::abs(t(j, l) - t(l, j)) > 1e-12 * scale)
                throw AdmissibilityError("residual stress is not symmetric");

    ElasticTensor4 c(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            for (int k = 0; k < dim; ++k)
                for (int l = 0; l < dim; ++l)
                    c(i, j, k, l) = moduli.lambda * delta(i, j) * delta(k, l)
                                  + moduli.mu * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k))
                                  + t(j, l) * delta(i, k);
    return c;
}

ElasticTensor4 make_isotropic(const IsotropicModuli &moduli, int dim) {
    require_dim(dim);
    return make_isotropic_residual(moduli, SmallMatrix::Zero(dim, dim), dim);
}

VoigtMatrix to_voigt(const ElasticTensor4 &c) {
    const int dim = c.dim();
    const auto pairs = voigt_pairs(dim);
    const int n = static_cast<int>(pairs.size());
    VoigtMatrix v{dim, VoigtStorage::Zero(n, n)};
    for (int a = 0; a < n; ++a) {
        const auto [p, q] = pairs[a];
        for (int b = 0; b < n; ++b) {
            const auto [r, s] = pairs[b];
            double val;
            if (p == q && r == s) {
                val = c(p, p, r, r);
            } else if (p == q) {
                val = c(p, p, r, s) + c(p, p, s, r);
            } else if (r == s) {
                val = c(p, q, r, r) + c(q, p, r, r);
            } else if (a == b) {
                val = c(p, q, p, q) + c(q, p, q, p) - c(p, q, q, p);
            } else {
                val = c(p, q, r, s) + c(p, q, s, r) + c(q, p, r, s) + c(q, p, s, r);
            }
            v.m(a, b) = val;
        }
    }
    return v;
}

ElasticTensor4 from_voigt(const VoigtMatrix &v) {
    const int dim = v.dim;
    require_dim(dim);
    const int n = dim == 2 ? 3 : 6;
    if (v.m.rows() != n || v.m.cols() != n)
        throw AdmissibilityError("Voigt matrix has the wrong size for its dimension");

    // Decode lambda from an off-diagonal normal entry, then (mu, t_ii) from
    // the normal diagonal d_i = 2 mu + t_ii and the shear diagonal
    // s_(ij) = mu + t_ii + t_jj.
    IsotropicModuli mod;
    mod.lambda = v.m(0, 1);
    SmallMatrix t = SmallMatrix::Zero(dim, dim);
    double sum_d = 0.0, sum_s = 0.0;
    for (int i = 0; i < dim; ++i) sum_d += v.m(i, i) - mod.lambda;
    for (int a = dim; a < n; ++a) sum_s += v.m(a, a);
    if (dim == 2) {
        mod.mu = (sum_d - sum_s) / 3.0;
    } else {
        mod.mu = (2.0 * sum_d - sum_s) / 9.0;
    }
    for (int i = 0; i < dim; ++i) t(i, i) = v.m(i, i) - mod.lambda - 2.0 * mod.mu;
    if (dim == 2) {
        t(0, 1) = t(1, 0) = v.m(0, 2);
    } else {
        t(1, 2) = t(2, 1) = v.m(1, 3);
        t(0, 2) = t(2, 0) = v.m(0, 4);
        t(0, 1) = t(1, 0) = v.m(0, 5);
    }
    ElasticTensor4 c = make_isotropic_residual(mod, t, dim);

    const VoigtMatrix back = to_voigt(c);
    const double scale = std::max(1.0, v.m.cwiseAbs().maxCoeff());
    if ((back.m - v.m).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw AdmissibilityError("Voigt matrix is outside the isotropic-plus-residual-stress image");
    return c;
}

double convexity_constant(const ElasticTensor4 &c) {
    const int dim = c.dim();
    const auto pairs = voigt_pairs(dim);
    const int n = static_cast<int>(pairs.size());

    // Orthonormal basis of symmetric matrices under the Frobenius product.
    std::vector<SmallMatrix> basis;
    basis.reserve(static_cast<std::size_t>(n));
    for (const auto &[p, q] : pairs) {
        SmallMatrix e = SmallMatrix::Zero(dim, dim);
        if (p == q) {
            e(p, p) = 1.0;
        } else {
            e(p, q) = e(q, p) = 1.0 / std::sqrt(2.0);
        }
        basis.push_back(e);
    }

    VoigtStorage form = VoigtStorage::Zero(n, n);
    for (int a = 0; a < n; ++a) {
        const SmallMatrix ce = contract(c, basis[static_cast<std::size_t>(a)]);
        for (int b = 0; b < n; ++b) form(b, a) = (basis[static_cast<std::size_t>(b)].array() * ce.array()).sum();
    }
    const VoigtStorage sym = 0.5 * (form + form.transpose());
    Eigen::SelfAdjointEigenSolver<VoigtStorage> eig(sym, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

SymmetryFlags check_symmetries(const ElasticTensor4 &c) {
    const int dim = c.dim();
    const double tol = 1e-12 * c.max_abs();
    double major = 0.0, minor = 0.0;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            for (int k = 0; k < dim; ++k)
                for (int l = 0; l < dim; ++l) {
                    major = std::max(major, std::abs(c(i, j, k, l) - c(k, l, i, j)));
                    minor = std::max(minor, std::abs(c(i, j, k, l) - c(j, i, k, l)));
                }
    return {major <= tol, minor <= tol};
}

ElasticTensor4 rotate_tensor(const ElasticTensor4 &c, const SmallMatrix &q) {
    const int dim = c.dim();
    if (q.rows() != dim || q.cols() != dim) throw DomainError("frame matrix size mismatch");
    // Four successive single-index transforms keep this at O(dim^5).
    ElasticTensor4 a = c, b(dim);
    for (int slot = 0; slot < 4; ++slot) {
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                for (int k = 0; k < dim; ++k)
                    for (int l = 0; l < dim; ++l) {
                        double s = 0.0;
                        for (int m = 0; m < dim; ++m) {
                            switch (slot) {
                            case 0: s += q(m, i) * a(m, j, k, l); break;
                            case 1: s += q(m, j) * a(i, m, k, l); break;
                            case 2: s += q(m, k) * a(i, j, m, l); break;
                            default: s += q(m, l) * a(i, j, k, m); break;
                            }
                        }
                        b(i, j, k, l) = s;
                    }
        std::swap(a, b);
    }
    return a;
}

SmallMatrix contract(const ElasticTensor4 &c, const SmallMatrix &grad) {
    const int dim = c.dim();
    SmallMatrix out = SmallMatrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            double s = 0.0;
            for (int k = 0; k < dim; ++k)
                for (int l = 0; l < dim; ++l) s += c(i, j, k, l) * grad(k, l);
            out(i, j) = s;
        }
    return out;
}

} // namespace nearcloak
