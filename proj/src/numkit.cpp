#include "conlearn/numkit.hpp"

#include "conlearn/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace conlearn {

namespace {

// Below this point F(x) is taken from the asymptotic tail expansion.
constexpr double kFarTail = -30.0;

// 1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 ; F(x) ~ f(x)/(-x) * series for x -> -inf.
double tail_series(double x) noexcept
{
    const double r = 1.0 / (x * x);
    return 1.0 + r * (-1.0 + r * (3.0 + r * (-15.0 + r * 105.0)));
}

void require_finite(const Matrix& A, const char* what)
{
    if (!A.allFinite()) {
        throw InvalidArgument(std::string(what) + ": non-finite entry");
    }
}

// Kahan-Babuska step on one slot.
inline void neumaier(double& sum, double& carry, double v) noexcept
{
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
        carry += (sum - t) + v;
    } else {
        carry += (v - t) + sum;
    }
    sum = t;
}

} // namespace

bool is_symmetric(const Matrix& A, double rel_tol)
{
    if (A.rows() != A.cols()) {
        return false;
    }
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    return (A - A.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Vector solve_spd(const Matrix& A, const Vector& b)
{
    if (A.rows() != A.cols() || A.rows() != b.size()) {
        throw InvalidArgument("solve_spd: dimension mismatch");
    }
    require_finite(A, "solve_spd");
    if (!b.allFinite()) {
        throw InvalidArgument("solve_spd: non-finite right-hand side");
    }
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("solve_spd: matrix is not positive definite");
    }
    return llt.solve(b);
}

double min_eigenvalue(const Matrix& A)
{
    require_finite(A, "min_eigenvalue");
    if (!is_symmetric(A)) {
        throw InvalidArgument("min_eigenvalue: matrix is not symmetric");
    }
    if (A.rows() == 0) {
        throw InvalidArgument("min_eigenvalue: empty matrix");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("min_eigenvalue: eigensolver did not converge");
    }
    return eig.eigenvalues().minCoeff();
}

double q_norm_sq(const Vector& v, const Matrix& Q)
{
    if (Q.rows() != v.size() || Q.cols() != v.size()) {
        throw InvalidArgument("q_norm_sq: dimension mismatch");
    }
    return v.dot(Q * v);
}

double normal_pdf(double x) noexcept
{
    return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

double normal_cdf(double x) noexcept
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

NormalPoint std_normal(double x) noexcept
{
    return {normal_pdf(x), normal_cdf(x)};
}

double normal_log_cdf(double x) noexcept
{
    if (x >= kFarTail) {
        return std::log(normal_cdf(x));
    }
    return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(-x) + std::log(tail_series(x));
}

double normal_hazard_left(double x) noexcept
{
    if (x >= kFarTail) {
        return normal_pdf(x) / normal_cdf(x);
    }
    return -x / tail_series(x);
}

void CompensatedVector::add(const Vector& v)
{
    for (Eigen::Index i = 0; i < sum_.size(); ++i) {
        neumaier(sum_[i], carry_[i], v[i]);
    }
}

void CompensatedVector::add_scaled(const Vector& v, double scale)
{
    for (Eigen::Index i = 0; i < sum_.size(); ++i) {
        neumaier(sum_[i], carry_[i], scale * v[i]);
    }
}

void CompensatedGram::add_outer(const Vector& x)
{
    const Eigen::Index n = x.size();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            neumaier(sum_(i, j), carry_(i, j), x[i] * x[j]);
            if (i != j) {
                sum_(j, i) = sum_(i, j);
                carry_(j, i) = carry_(i, j);
            }
        }
    }
}

} // namespace conlearn
