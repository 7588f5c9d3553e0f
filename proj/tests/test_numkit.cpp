#include "conlearn/errors.hpp"
#include "conlearn/numkit.hpp"
#include "conlearn/oracles.hpp"
#include "conlearn/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace conlearn;

namespace {

Matrix random_spd(std::uint64_t seed, Eigen::Index d)
{
    CounterRng rng(make_key(seed, StreamTag::Oracle, 100));
    std::normal_distribution<double> normal;
    Matrix A(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            A(i, j) = normal(rng);
        }
    }
    return A * A.transpose() + 0.1 * Matrix::Identity(d, d);
}

} // namespace

TEST_CASE("solve_spd on simple systems")
{
    CHECK(solve_spd(Matrix::Identity(2, 2), Vector{{3.0, -1.0}}).isApprox(Vector{{3.0, -1.0}}));
    Matrix D = Vector{{2.0, 4.0}}.asDiagonal();
    const Vector x = solve_spd(D, Vector{{2.0, 4.0}});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("solve_spd agrees with elimination")
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Matrix A = random_spd(seed, 5);
        Vector b(5);
        b << 1.0, -2.0, 0.5, 3.0, -0.25;
        const Vector x = solve_spd(A, b);
        const Vector ref = oracle::gaussian_elimination(A, b);
        CHECK((x - ref).norm() <= 1e-9 * (1.0 + ref.norm()));
        CHECK((A * x - b).norm() <= 1e-9 * (1.0 + b.norm()));
    }
}

TEST_CASE("solve_spd rejects bad input")
{
    Matrix indefinite{{1.0, 2.0}, {2.0, 1.0}};
    CHECK_THROWS_AS(solve_spd(indefinite, Vector::Ones(2)), NumericalError);
    Matrix nan = Matrix::Identity(2, 2);
    nan(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(solve_spd(nan, Vector::Ones(2)), InvalidArgument);
    CHECK_THROWS_AS(solve_spd(Matrix::Identity(2, 2), Vector::Ones(3)), InvalidArgument);
}

TEST_CASE("min_eigenvalue")
{
    CHECK(min_eigenvalue(Matrix::Identity(2, 2)) == doctest::Approx(1.0));
    Matrix D = Vector{{2.0, 5.0}}.asDiagonal();
    CHECK(min_eigenvalue(D) == doctest::Approx(2.0));
    // smaller root of l^2 - 5 l + 5
    Matrix A{{3.0, 1.0}, {1.0, 2.0}};
    CHECK(min_eigenvalue(A) == doctest::Approx((5.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-14));
    CHECK_THROWS_AS(min_eigenvalue(Matrix{{1.0, 0.5}, {0.0, 1.0}}), InvalidArgument);
}

TEST_CASE("min_eigenvalue agrees with Jacobi sweeps")
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Matrix A = random_spd(seed, 6);
        const double ref = oracle::jacobi_eigenvalues(A).front();
        CHECK(min_eigenvalue(A) == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("q_norm_sq")
{
    CHECK(q_norm_sq(Vector{{1.0, 2.0}}, Matrix::Identity(2, 2)) == 5.0);
    CHECK(q_norm_sq(Vector::Zero(2), Matrix::Identity(2, 2)) == 0.0);
    CHECK(q_norm_sq(Vector{{1.0, 1.0}}, Matrix{{2.0, 1.0}, {1.0, 2.0}}) == doctest::Approx(6.0));
}

TEST_CASE("standard normal")
{
    const NormalPoint p = std_normal(0.0);
    CHECK(p.pdf == doctest::Approx(0.3989422804014327));
    CHECK(p.cdf == 0.5);
    CHECK(normal_cdf(40.0) == 1.0);

    const double integral = 0.5 + oracle::adaptive_simpson(normal_pdf, 0.0, 1.0, 1e-14);
    CHECK(normal_cdf(1.0) == doctest::Approx(integral).epsilon(1e-12));
    CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447461).epsilon(1e-10));
}

TEST_CASE("left tail stays finite and continuous")
{
    CHECK(std::isfinite(normal_log_cdf(-60.0)));
    CHECK(normal_log_cdf(-60.0) < normal_log_cdf(-59.0));
    // f/F ~ -x for very negative x
    CHECK(normal_hazard_left(-100.0) == doctest::Approx(100.0).epsilon(1e-3));
    for (double x : {-30.0, -29.999999}) {
        const double direct = std::exp(std::log(normal_pdf(x)) - normal_log_cdf(x));
        CHECK(normal_hazard_left(x) == doctest::Approx(direct).epsilon(1e-9));
    }
    CHECK(normal_log_cdf(-30.0) == doctest::Approx(normal_log_cdf(-30.000000001)).epsilon(1e-9));
}

TEST_CASE("compensated sums recover small terms")
{
    CompensatedVector acc(1);
    acc.add(Vector::Constant(1, 1e16));
    for (int i = 0; i < 1000; ++i) {
        acc.add(Vector::Constant(1, 1.0));
    }
    acc.add(Vector::Constant(1, -1e16));
    CHECK(acc.value()[0] == 1000.0);

    CompensatedGram gram(2);
    gram.add_outer(Vector{{1.0, 2.0}});
    gram.add_outer(Vector{{0.0, 1.0}});
    CHECK(gram.value().isApprox(Matrix{{1.0, 2.0}, {2.0, 5.0}}));
}
