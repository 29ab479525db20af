#pragma once

#include <complex>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace nearcloak {

using SparseMatrixC = Eigen::SparseMatrix<std::complex<double>, Eigen::ColMajor, int>;

/// Direct LU factorization of a square complex sparse matrix.  Backed by
/// UMFPACK when the library was found at configure time, Eigen::SparseLU
/// otherwise.  A factorization is reused for any number of right-hand sides;
/// solve() is const and safe to call from several threads.
class SparseLu {
public:
    SparseLu();
    explicit SparseLu(const SparseMatrixC &a);
    ~SparseLu();
    SparseLu(SparseLu &&) noexcept;
    SparseLu &operator=(SparseLu &&) noexcept;
    SparseLu(const SparseLu &) = delete;
    SparseLu &operator=(const SparseLu &) = delete;

    void factor(const SparseMatrixC &a);

    /// True when the factorization hit an exactly zero pivot.
    bool singular() const;
    /// min |U_ii| / max |U_ii| (UMFPACK) or NaN when unavailable.
    double rcond() const;
    int rows() const;

    Eigen::VectorXcd solve(const Eigen::VectorXcd &b) const;
    Eigen::MatrixXcd solve(const Eigen::MatrixXcd &b) const;

    static const char *backend();

private:
    struct Impl;
    std::unique_ptr<Impl> m_impl;
};

/// Smallest singular value of D^{-1/2} A D^{-1/2} for a complex symmetric A
/// (A^T = A) and positive diagonal scaling `d`, by inverse iteration on
/// (A^H A)^{-1} using the factorization of A.  Returns 0 for a singular
/// factorization.
double smallest_singular_value(const SparseLu &lu, const Eigen::VectorXd &d, int max_iter = 40, double tol = 1e-7);

} // namespace nearcloak
