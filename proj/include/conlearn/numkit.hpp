#pragma once

// Small dense linear algebra and normal-distribution helpers. Dimensions are
// expected to stay small (tens of coordinates), so everything is dense.

#include <Eigen/Dense>

#include <cstddef>

namespace conlearn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Solves A x = b for symmetric positive definite A via Cholesky.
/// Throws InvalidArgument on non-finite input or size mismatch, NumericalError
/// if the factorization finds A is not positive definite.
Vector solve_spd(const Matrix& A, const Vector& b);

/// Smallest eigenvalue of a symmetric matrix (full self-adjoint eigensolve).
/// Rejects matrices that are not symmetric to 1e-12 relative.
double min_eigenvalue(const Matrix& A);

/// v' Q v.
double q_norm_sq(const Vector& v, const Matrix& Q);

struct NormalPoint {
    double pdf;
    double cdf;
};

/// Standard normal density and distribution function at x.
NormalPoint std_normal(double x) noexcept;

double normal_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;

/// log F(x), accurate in the far left tail where F underflows.
double normal_log_cdf(double x) noexcept;

/// f(x) / F(x) (inverse Mills ratio of the left tail), stable for very negative x.
double normal_hazard_left(double x) noexcept;

/// True if |A - A'| <= tol * max(1, max|A|) entrywise.
bool is_symmetric(const Matrix& A, double rel_tol = 1e-12);

/// Neumaier-compensated running sum of a vector.
class CompensatedVector {
public:
    explicit CompensatedVector(Eigen::Index n) : sum_(Vector::Zero(n)), carry_(Vector::Zero(n)) {}

    void add(const Vector& v);
    void add_scaled(const Vector& v, double scale);
    Vector value() const { return sum_ + carry_; }

private:
    Vector sum_;
    Vector carry_;
};

/// Neumaier-compensated running sum of outer products x x'.
class CompensatedGram {
public:
    explicit CompensatedGram(Eigen::Index n) : sum_(Matrix::Zero(n, n)), carry_(Matrix::Zero(n, n)) {}

    void add_outer(const Vector& x);
    Matrix value() const { return sum_ + carry_; }

private:
    Matrix sum_;
    Matrix carry_;
};

} // namespace conlearn
