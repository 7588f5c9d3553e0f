#pragma once

// Independent reference computations used by the verification suite and the
// tests. None of these share code paths with the production routines they
// check: no Cholesky, no Eigen solvers, no bisection.

#include "conlearn/models.hpp"
#include "conlearn/numkit.hpp"

#include <functional>
#include <span>
#include <vector>

namespace conlearn::oracle {

/// Gaussian elimination with partial pivoting on plain loops.
Vector gaussian_elimination(const Matrix& A, const Vector& b);

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
std::vector<double> jacobi_eigenvalues(const Matrix& A);

/// One-shot minimizer of ||w - w0||^2_{Q0} + sum_k beta_k sum_i (x'w - y)^2.
Vector batch_weighted_ridge(const Vector& w0, const Matrix& Q0, std::span<const TaskData> tasks,
                            std::span<const double> betas);

/// Least-squares fit of a single task by normal equations.
Vector task_least_squares(const TaskData& task);

/// Best point on the sphere ||w|| = radius for (x - w)'Q(x - w): dense grid (d = 2: 1e-3 rad
/// polar grid; d = 3: Fibonacci lattice) followed by coordinate refinement.
Vector grid_projection(const Vector& x, const Matrix& Q, double radius);

/// Central difference (f(x+h) - f(x-h)) / 2h.
double central_difference(const std::function<double(double)>& f, double x, double h);

/// Adaptive Simpson quadrature of f over [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);

} // namespace conlearn::oracle
