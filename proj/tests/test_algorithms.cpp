#include "conlearn/algorithms.hpp"
#include "conlearn/errors.hpp"
#include "conlearn/oracles.hpp"
#include "conlearn/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace conlearn;

namespace {

TaskData one_sample(double x, double y)
{
    TaskData t;
    t.features = Matrix::Constant(1, 1, x);
    t.outputs = Vector::Constant(1, y);
    t.w_true = Vector::Zero(1);
    return t;
}

} // namespace

TEST_CASE("alg1 single scalar sample")
{
    const LearnerState s0 = LearnerState::initial(1);
    const LearnerState s1 = alg1_update(s0, one_sample(1.0, 1.0), Alg1Config{1.0, 10.0, LinearLoss{}});
    CHECK(s1.Q(0, 0) == 2.0);
    // argmin 1/2 (w - 1)^2 + 1/2 w^2
    CHECK(s1.w[0] == doctest::Approx(0.5));
    CHECK(s1.t == 1);

    const LearnerState clipped = alg1_update(s0, one_sample(1.0, 1.0), Alg1Config{1.0, 0.3, LinearLoss{}});
    CHECK(clipped.w[0] == doctest::Approx(0.3));
}

TEST_CASE("empty task leaves the state alone")
{
    LearnerState s = LearnerState::initial(Vector{{0.2, -0.4}});
    s.Q(0, 0) = 3.0;
    TaskData empty;
    empty.features.resize(0, 2);
    const LearnerState a = alg1_update(s, empty, Alg1Config{});
    const LearnerState b = alg2_update(s, empty, 0.7);
    CHECK(a.w == s.w);
    CHECK(a.Q == s.Q);
    CHECK(a.t == s.t);
    CHECK(b.w == s.w);
    CHECK(b.Q == s.Q);
}

TEST_CASE("projection")
{
    const Matrix I = Matrix::Identity(2, 2);
    const Vector inside{{0.3, 0.4}};
    CHECK(project_q_ball(inside, I, 1.0) == inside);
    const Vector p = project_q_ball(Vector{{3.0, 4.0}}, I, 1.0);
    CHECK(p[0] == doctest::Approx(0.6));
    CHECK(p[1] == doctest::Approx(0.8));

    Matrix Q = Vector{{1.0, 4.0}}.asDiagonal();
    const Vector x{{2.0, 1.0}};
    const Vector proj = project_q_ball(x, Q, 1.0);
    const Vector grid = oracle::grid_projection(x, Q, 1.0);
    CHECK(proj.norm() <= 1.0 + 1e-10);
    CHECK(q_norm_sq(x - proj, Q) <= q_norm_sq(x - grid, Q) + 1e-9);
    CHECK_THROWS_AS(project_q_ball(x, Q, -1.0), InvalidArgument);
}

TEST_CASE("alg2 single scalar sample")
{
    const LearnerState s1 = alg2_update(LearnerState::initial(1), one_sample(1.0, 1.0), 1.0);
    CHECK(s1.Q(0, 0) == 2.0);
    CHECK(s1.w[0] == doctest::Approx(0.5));
    const LearnerState s0 = alg2_update(s1, one_sample(3.0, -2.0), 0.0);
    CHECK(s0.w == s1.w);
    CHECK(s0.Q == s1.Q);
}

TEST_CASE("alg2 matches weighted batch ridge")
{
    const Vector w_true{{1.0, -2.0, 0.5}};
    std::vector<TaskData> tasks;
    const std::vector<double> betas{1.0, 0.5, 0.25};
    for (std::uint64_t k = 1; k <= 3; ++k) {
        tasks.push_back(generate_task(LinearLoss{}, w_true, 4, BoundedUniformFeatures{2.0}, GaussianNoise{0.3}, 8, k));
    }
    const Vector w0{{0.1, 0.2, -0.3}};
    Matrix Q0 = Matrix::Identity(3, 3);
    Q0(0, 1) = Q0(1, 0) = 0.2;
    LearnerState s{w0, Q0, 0};
    for (std::size_t k = 0; k < 3; ++k) {
        s = alg2_update(s, tasks[k], betas[k]);
    }
    const Vector ref = oracle::batch_weighted_ridge(w0, Q0, tasks, betas);
    CHECK((s.w - ref).norm() <= 1e-12 * ref.norm());
}

TEST_CASE("beta schedule")
{
    CHECK(beta_schedule(7, 0.0) == 1.0);
    CHECK(beta_schedule(1, 0.4) == 1.0);
    CHECK(beta_schedule(100, 0.25) == doctest::Approx(0.316227766).epsilon(1e-9));
    CHECK_THROWS_AS(beta_schedule(0, 0.1), InvalidArgument);
    CHECK_THROWS_AS(beta_schedule(5, 0.5), InvalidArgument);
}

TEST_CASE("sgd")
{
    const Vector w{{0.0}};
    CHECK(sgd_update(Vector{{0.7}}, one_sample(1.0, 1.0), LinearLoss{}, 0.0, 3).w[0] == 0.7);
    CHECK(sgd_update(w, one_sample(1.0, 1.0), LinearLoss{}, 0.5, 1).w[0] == doctest::Approx(0.5));

    const TaskData t = generate_task(LinearLoss{}, Vector{{1.0, -1.0}}, 15, BoundedUniformFeatures{1.0},
                                     GaussianNoise{0.2}, 6, 1);
    const SgdResult r = sgd_update(Vector::Zero(2), t, LinearLoss{}, 0.05, 20000);
    const Vector ls = oracle::task_least_squares(t);
    // Constant-step SGD circles the LS solution within O(lr).
    CHECK((r.w - ls).norm() < 0.05);

    const SgdResult blow = sgd_update(Vector::Zero(1), one_sample(10.0, 1.0), LinearLoss{}, 1.0, 100);
    CHECK(blow.diverged);
}

TEST_CASE("learner driver")
{
    Learner alg1(Alg1Config{}, Vector::Zero(1));
    alg1.learn(one_sample(1.0, 1.0));
    CHECK(alg1.stage() == 1);
    CHECK(alg1.estimate()[0] == doctest::Approx(0.5));
    CHECK(alg1.name() == "alg1");

    Alg2Config cfg;
    cfg.betas = {0.25, 1.0};
    Learner alg2(cfg, Vector::Zero(1));
    alg2.learn(one_sample(1.0, 1.0));
    CHECK(alg2.estimate()[0] == doctest::Approx(0.2));
    alg2.learn(one_sample(1.0, 1.0));
    // batch: (0.25 + 1) / (1 + 0.25 + 1)
    CHECK(alg2.estimate()[0] == doctest::Approx(1.25 / 2.25));

    Learner sgd(SgdConfig{0.5, 1, LinearLoss{}}, Vector::Zero(1));
    sgd.learn(one_sample(1.0, 1.0));
    CHECK(sgd.information() == Matrix::Identity(1, 1));
    CHECK(sgd.name() == "sgd");
}

TEST_CASE("alg1 stays inside the ball for nonlinear families")
{
    const Vector w_true{{3.0, -3.0}};
    LearnerState s = LearnerState::initial(2);
    Alg1Config cfg;
    cfg.family = LogisticLoss{};
    cfg.radius = 1.0;
    cfg.mu = default_alg1_gain(cfg.family, 1.0, cfg.radius);
    for (std::uint64_t k = 1; k <= 50; ++k) {
        s = alg1_update(s, generate_task(LogisticLoss{}, w_true, 10, BoundedUniformFeatures{1.0}, GaussianNoise{0.1}, 2, k),
                        cfg);
        CHECK(s.w.norm() <= cfg.radius + 1e-10);
    }
    CHECK_THROWS_AS(default_alg1_gain(LogisticLoss{}, std::numeric_limits<double>::infinity(), 1.0), InvalidArgument);
}
