#include "conlearn/errors.hpp"
#include "conlearn/models.hpp"
#include "conlearn/numkit.hpp"
#include "conlearn/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace conlearn;

TEST_CASE("empty task")
{
    const TaskData t = generate_task(LinearLoss{}, Vector{{1.0, 0.0}}, 0, BoundedUniformFeatures{1.0},
                                     GaussianNoise{0.1}, 1, 1);
    CHECK(t.size() == 0);
}

TEST_CASE("noiseless linear output")
{
    const TaskData t = generate_task(LinearLoss{}, Vector{{1.0, 0.0}}, 50, BoundedUniformFeatures{3.0},
                                     UniformNoise{0.0}, 4, 2);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        CHECK(t.outputs[i] == t.features(i, 0));
    }
}

TEST_CASE("bounded features stay inside the ball")
{
    for (std::uint64_t k = 1; k <= 200; ++k) {
        const TaskData t = generate_task(LinearLoss{}, Vector::Zero(4), 20, BoundedUniformFeatures{2.0},
                                         GaussianNoise{1.0}, 9, k);
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            CHECK(t.features.row(i).norm() < 2.0);
        }
    }
}

TEST_CASE("saturated censoring fraction")
{
    const SaturatedLoss sat{-1.0, 1.0, -1.0, 1.0};
    const Eigen::Index n = 100000;
    const TaskData t = generate_task(sat, Vector::Zero(2), n, BoundedUniformFeatures{1.0}, GaussianNoise{1.0}, 3, 1);
    double censored = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        censored += (t.outputs[i] == sat.floor_out || t.outputs[i] == sat.ceiling_out) ? 1.0 : 0.0;
    }
    const double p = 2.0 * normal_cdf(-1.0);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(censored / static_cast<double>(n) - p) <= 3.0 * se);
}

TEST_CASE("logistic labels are binary by default")
{
    const TaskData t = generate_task(LogisticLoss{}, Vector{{1.0, -1.0}}, 500, BoundedUniformFeatures{1.0},
                                     GaussianNoise{0.1}, 2, 1);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        CHECK((t.outputs[i] == 0.0 || t.outputs[i] == 1.0));
    }
    GenerationOptions soft;
    soft.logistic_noise = LogisticNoiseMode::TruncatedAdditive;
    const TaskData s = generate_task(LogisticLoss{}, Vector{{1.0, -1.0}}, 500, BoundedUniformFeatures{1.0},
                                     GaussianNoise{0.1}, 2, 1, soft);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        CHECK(s.outputs[i] >= 0.0);
        CHECK(s.outputs[i] <= 1.0);
    }
}

TEST_CASE("generation is deterministic and prefix stable")
{
    const auto a = generate_task(LinearLoss{}, Vector{{1.0, 2.0}}, 30, BoundedUniformFeatures{1.0}, StudentTNoise{5, 1},
                                 11, 7);
    const auto b = generate_task(LinearLoss{}, Vector{{1.0, 2.0}}, 10, BoundedUniformFeatures{1.0}, StudentTNoise{5, 1},
                                 11, 7);
    CHECK(a.features.topRows(10) == b.features);
    CHECK(a.outputs.head(10) == b.outputs);
    const auto c = generate_task(LinearLoss{}, Vector{{1.0, 2.0}}, 10, BoundedUniformFeatures{1.0}, StudentTNoise{5, 1},
                                 12, 7);
    CHECK(c.outputs != b.outputs);
}

TEST_CASE("moment_check")
{
    const std::vector<double> zeros(10, 0.0);
    CHECK(moment_check(zeros, 2.0) == 0.0);
    const std::vector<double> alt{1.0, -1.0, 1.0, -1.0};
    CHECK(moment_check(alt, 2.0) == 1.0);

    CounterRng rng(make_key(5, StreamTag::Oracle));
    std::normal_distribution<double> normal;
    std::vector<double> draws(100000);
    for (auto& v : draws) {
        v = normal(rng);
    }
    // Var(z^2) = 2 for a standard normal.
    const double se = std::sqrt(2.0 / static_cast<double>(draws.size()));
    CHECK(std::abs(moment_check(draws, 2.0) - 1.0) <= 3.0 * se);
    CHECK_THROWS_AS(moment_check(std::vector<double>{}, 2.0), InvalidArgument);
}

TEST_CASE("parameter validation")
{
    CHECK_THROWS_AS(validate_noise(StudentTNoise{2.0, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(validate_noise(GaussianNoise{-1.0}), InvalidArgument);
    CHECK_THROWS_AS(validate_regime(BoundedUniformFeatures{0.0}, 2), InvalidArgument);
    CHECK_THROWS_AS(validate_regime(LowExcitationFeatures{1.0, 1.0}, 2), InvalidArgument);
    CHECK_THROWS_AS(validate_regime(GaussianFeatures{Matrix::Identity(3, 3)}, 2), InvalidArgument);
    CHECK(feature_bound(GaussianFeatures{Matrix::Identity(2, 2)}) == std::numeric_limits<double>::infinity());
}

TEST_CASE("low excitation grows the Gram matrix slower than linearly")
{
    const Eigen::Index d = 3;
    Matrix gram = Matrix::Identity(d, d);
    std::vector<double> lam;
    for (std::uint64_t k = 1; k <= 20000; ++k) {
        const TaskData t = generate_task(LinearLoss{}, Vector::Zero(d), 5, LowExcitationFeatures{1.0, 0.6},
                                         GaussianNoise{0.1}, 21, k);
        gram += t.features.transpose() * t.features;
        if (k == 2000 || k == 20000) {
            lam.push_back(min_eigenvalue(gram));
        }
    }
    // m^0.6 scaling: ratio over a decade near 10^0.6 ~ 3.98, far from 10.
    const double ratio = lam[1] / lam[0];
    CHECK(ratio > 2.5);
    CHECK(ratio < 6.0);
}
