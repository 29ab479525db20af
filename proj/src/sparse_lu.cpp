#include "nearcloak/sparse_lu.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nearcloak/errors.hpp"

#ifdef NEARCLOAK_HAVE_UMFPACK
#include <umfpack.h>
#else
#include <Eigen/SparseLU>
#endif

namespace nearcloak {

#ifdef NEARCLOAK_HAVE_UMFPACK

struct SparseLu::Impl {
    int n = 0;
    std::vector<int> ap, ai;
    std::vector<double> ax; // packed (re, im) pairs
    void *numeric = nullptr;
    bool zero_pivot = false;
    double rcond = std::numeric_limits<double>::quiet_NaN();

    ~Impl() {
        if (numeric) umfpack_zi_free_numeric(&numeric);
    }

    void factor(const SparseMatrixC &a) {
        if (numeric) umfpack_zi_free_numeric(&numeric);
        n = static_cast<int>(a.rows());
        SparseMatrixC c = a;
        c.makeCompressed();
        ap.assign(c.outerIndexPtr(), c.outerIndexPtr() + n + 1);
        ai.assign(c.innerIndexPtr(), c.innerIndexPtr() + c.nonZeros());
        const double *v = reinterpret_cast<const double *>(c.valuePtr());
        ax.assign(v, v + 2 * c.nonZeros());

        double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
        umfpack_zi_defaults(control);
        void *symbolic = nullptr;
        int status = umfpack_zi_symbolic(n, n, ap.data(), ai.data(), ax.data(), nullptr, &symbolic, control, info);
        if (status != UMFPACK_OK) throw std::runtime_error("UMFPACK symbolic analysis failed, status " + std::to_string(status));
        status = umfpack_zi_numeric(ap.data(), ai.data(), ax.data(), nullptr, symbolic, &numeric, control, info);
        umfpack_zi_free_symbolic(&symbolic);
        if (status == UMFPACK_WARNING_singular_matrix) {
            zero_pivot = true;
        } else if (status != UMFPACK_OK) {
            throw std::runtime_error("UMFPACK numeric factorization failed, status " + std::to_string(status));
        } else {
            zero_pivot = false;
        }
        rcond = info[UMFPACK_RCOND];
    }

    void solve(const std::complex<double> *b, std::complex<double> *x) const {
        double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
        umfpack_zi_defaults(control);
        const int status = umfpack_zi_solve(UMFPACK_A, ap.data(), ai.data(), ax.data(), nullptr,
                                            reinterpret_cast<double *>(x), nullptr,
                                            reinterpret_cast<const double *>(b), nullptr, numeric, control, info);
        if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
            throw std::runtime_error("UMFPACK solve failed, status " + std::to_string(status));
    }
};

const char *SparseLu::backend() { return "umfpack"; }

#else

struct SparseLu::Impl {
    int n = 0;
    Eigen::SparseLU<SparseMatrixC, Eigen::COLAMDOrdering<int>> lu;
    bool zero_pivot = false;
    double rcond = std::numeric_limits<double>::quiet_NaN();

    void factor(const SparseMatrixC &a) {
        n = static_cast<int>(a.rows());
        lu.compute(a);
        zero_pivot = lu.info() != Eigen::Success;
    }

    void solve(const std::complex<double> *b, std::complex<double> *x) const {
        Eigen::Map<const Eigen::VectorXcd> bb(b, n);
        Eigen::Map<Eigen::VectorXcd> xx(x, n);
        xx = const_cast<Eigen::SparseLU<SparseMatrixC, Eigen::COLAMDOrdering<int>> &>(lu).solve(bb);
    }
};

const char *SparseLu::backend() { return "eigen-sparselu"; }

#endif

SparseLu::SparseLu() : m_impl(std::make_unique<Impl>()) {}

SparseLu::SparseLu(const SparseMatrixC &a) : SparseLu() { factor(a); }

SparseLu::~SparseLu() = default;
SparseLu::SparseLu(SparseLu &&) noexcept = default;
SparseLu &SparseLu::operator=(SparseLu &&) noexcept = default;

void SparseLu::factor(const SparseMatrixC &a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("SparseLu needs a square matrix");
    m_impl->factor(a);
}

bool SparseLu::singular() const { return m_impl->zero_pivot; }

double SparseLu::rcond() const { return m_impl->rcond; }

int SparseLu::rows() const { return m_impl->n; }

Eigen::VectorXcd SparseLu::solve(const Eigen::VectorXcd &b) const {
    if (b.size() != m_impl->n) throw std::invalid_argument("right-hand side size mismatch");
    Eigen::VectorXcd x(b.size());
    m_impl->solve(b.data(), x.data());
    return x;
}

Eigen::MatrixXcd SparseLu::solve(const Eigen::MatrixXcd &b) const {
    if (b.rows() != m_impl->n) throw std::invalid_argument("right-hand side size mismatch");
    Eigen::MatrixXcd x(b.rows(), b.cols());
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
        Eigen::VectorXcd col = b.col(c);
        Eigen::VectorXcd out(b.rows());
        m_impl->solve(col.data(), out.data());
        x.col(c) = out;
    }
    return x;
}

double smallest_singular_value(const SparseLu &lu, const Eigen::VectorXd &d, int max_iter, double tol) {
    if (lu.singular()) return 0.0;
    const Eigen::Index n = lu.rows();
    if (d.size() != n) throw std::invalid_argument("scaling size mismatch");
    const Eigen::VectorXd s = d.cwiseSqrt();

    // inv(Ahat) v = S inv(A) S v with S = D^{1/2}; inv(Ahat)^H w = conj(inv(Ahat) conj(w)).
    auto apply_inv = [&](const Eigen::VectorXcd &v) -> Eigen::VectorXcd {
        Eigen::VectorXcd sv = s.cast<std::complex<double>>().cwiseProduct(v);
        return s.cast<std::complex<double>>().cwiseProduct(lu.solve(sv));
    };

    Eigen::VectorXcd x(n);
    for (Eigen::Index k = 0; k < n; ++k)
        x[k] = std::complex<double>(1.0 + 0.37 * std::sin(1.3 * static_cast<double>(k)), 0.21 * std::cos(0.7 * static_cast<double>(k)));
    x.normalize();

    double sigma = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXcd z = apply_inv(x);
        const Eigen::VectorXcd y = apply_inv(z.conjugate()).conjugate();
        const double growth = y.norm();
        if (!std::isfinite(growth)) return 0.0;
        const double next = 1.0 / std::sqrt(growth);
        x = y / growth;
        if (std::abs(next - sigma) <= tol * next) {
            sigma = next;
            break;
        }
        sigma = next;
    }
    return sigma;
}

} // namespace nearcloak
