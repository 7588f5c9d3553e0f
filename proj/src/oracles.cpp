#include "conlearn/oracles.hpp"

#include "conlearn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace conlearn::oracle {

namespace {

double qdist(const Vector& x, const Vector& w, const Matrix& Q)
{
    const Vector r = x - w;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        for (Eigen::Index j = 0; j < r.size(); ++j) {
            acc += r[i] * Q(i, j) * r[j];
        }
    }
    return acc;
}

Vector sphere_point(const std::vector<double>& angles, double radius)
{
    if (angles.size() == 1) {
        return Vector{{radius * std::cos(angles[0]), radius * std::sin(angles[0])}};
    }
    const double theta = angles[0];
    const double phi = angles[1];
    return Vector{{radius * std::sin(theta) * std::cos(phi), radius * std::sin(theta) * std::sin(phi),
                   radius * std::cos(theta)}};
}

double simpson(double a, double fa, double b, double fb, double fm)
{
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b, double fb, double m,
                    double fm, double whole, double tol, int depth)
{
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace

Vector gaussian_elimination(const Matrix& A, const Vector& b)
{
    const auto n = static_cast<std::size_t>(b.size());
    if (A.rows() != b.size() || A.cols() != b.size()) {
        throw InvalidArgument("gaussian_elimination: dimension mismatch");
    }
    std::vector<std::vector<double>> m(n, std::vector<double>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            m[i][j] = A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        m[i][n] = b[static_cast<Eigen::Index>(i)];
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) {
                pivot = r;
            }
        }
        if (m[pivot][col] == 0.0) {
            throw NumericalError("gaussian_elimination: singular matrix");
        }
        std::swap(m[col], m[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = m[r][col] / m[col][col];
            for (std::size_t c = col; c <= n; ++c) {
                m[r][c] -= factor * m[col][c];
            }
        }
    }
    Vector x(static_cast<Eigen::Index>(n));
    for (std::size_t i = n; i-- > 0;) {
        double acc = m[i][n];
        for (std::size_t j = i + 1; j < n; ++j) {
            acc -= m[i][j] * x[static_cast<Eigen::Index>(j)];
        }
        x[static_cast<Eigen::Index>(i)] = acc / m[i][i];
    }
    return x;
}

std::vector<double> jacobi_eigenvalues(const Matrix& A)
{
    const Eigen::Index n = A.rows();
    Matrix a = A;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                off += a(p, q) * a(p, q);
            }
        }
        if (off < 1e-30) {
            break;
        }
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = a(i, i);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Vector batch_weighted_ridge(const Vector& w0, const Matrix& Q0, std::span<const TaskData> tasks,
                            std::span<const double> betas)
{
    if (tasks.size() != betas.size()) {
        throw InvalidArgument("batch_weighted_ridge: one beta per task required");
    }
    const Eigen::Index d = w0.size();
    Matrix lhs = Q0;
    Vector rhs = Q0 * w0;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        const auto& task = tasks[k];
        for (Eigen::Index i = 0; i < task.size(); ++i) {
            for (Eigen::Index a = 0; a < d; ++a) {
                rhs[a] += betas[k] * task.features(i, a) * task.outputs[i];
                for (Eigen::Index b = 0; b < d; ++b) {
                    lhs(a, b) += betas[k] * task.features(i, a) * task.features(i, b);
                }
            }
        }
    }
    return gaussian_elimination(lhs, rhs);
}

Vector task_least_squares(const TaskData& task)
{
    const Eigen::Index d = task.dim();
    Matrix lhs = Matrix::Zero(d, d);
    Vector rhs = Vector::Zero(d);
    for (Eigen::Index i = 0; i < task.size(); ++i) {
        for (Eigen::Index a = 0; a < d; ++a) {
            rhs[a] += task.features(i, a) * task.outputs[i];
            for (Eigen::Index b = 0; b < d; ++b) {
                lhs(a, b) += task.features(i, a) * task.features(i, b);
            }
        }
    }
    return gaussian_elimination(lhs, rhs);
}

Vector grid_projection(const Vector& x, const Matrix& Q, double radius)
{
    const Eigen::Index d = x.size();
    if (d != 2 && d != 3) {
        throw InvalidArgument("grid_projection: only d = 2 or 3");
    }
    std::vector<double> best;
    double best_val = std::numeric_limits<double>::infinity();
    auto consider = [&](std::vector<double> angles) {
        const double v = qdist(x, sphere_point(angles, radius), Q);
        if (v < best_val) {
            best_val = v;
            best = std::move(angles);
        }
    };
    if (d == 2) {
        for (double a = 0.0; a < 2.0 * std::numbers::pi; a += 1e-3) {
            consider({a});
        }
    } else {
        const int count = 40000;
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / count;
            consider({std::acos(z), golden * i});
        }
    }
    // Shrinking coordinate search on the angles.
    double step = d == 2 ? 1e-3 : 2e-2;
    while (step > 1e-13) {
        bool improved = false;
        for (std::size_t k = 0; k < best.size(); ++k) {
            for (double dir : {-1.0, 1.0}) {
                auto trial = best;
                trial[k] += dir * step;
                const double v = qdist(x, sphere_point(trial, radius), Q);
                if (v < best_val) {
                    best_val = v;
                    best = std::move(trial);
                    improved = true;
                }
            }
        }
        if (!improved) {
            step *= 0.5;
        }
    }
    return sphere_point(best, radius);
}

double central_difference(const std::function<double(double)>& f, double x, double h)
{
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol)
{
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, 50);
}

} // namespace conlearn::oracle
