#include "conlearn/verify.hpp"

#include "conlearn/algorithms.hpp"
#include "conlearn/config.hpp"
#include "conlearn/errors.hpp"
#include "conlearn/harness.hpp"
#include "conlearn/oracles.hpp"
#include "conlearn/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <unistd.h>

namespace conlearn {

namespace {

using Clock = std::chrono::steady_clock;

std::string num(double v, int precision = 4)
{
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

template <class Body>
CheckResult timed(std::string name, double budget, Body&& body)
{
    CheckResult r;
    r.name = std::move(name);
    r.time_budget = budget;
    const auto start = Clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail += std::string(" exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (r.passed && r.seconds > budget) {
        r.passed = false;
        r.detail += " (exceeded " + num(budget) + " s budget)";
    }
    return r;
}

// Shared parameter for the Case-1 rate streams, ||w*|| ~ 1.66.
Vector shared_w_star()
{
    return Vector{{1.0, -0.5, 0.25, 0.75, -1.0}};
}

ExperimentConfig shared_config(const LossFamily& family, const FeatureRegime& regime, double radius)
{
    ExperimentConfig cfg;
    StreamSpec& s = cfg.stream;
    s.stream_case = StreamCase::Shared;
    s.dim = 5;
    s.num_tasks = 5000;
    s.samples_per_task = 10;
    s.family = family;
    s.regime = regime;
    s.noise = std::holds_alternative<SaturatedLoss>(family) ? NoiseSpec{GaussianNoise{1.0}} : NoiseSpec{GaussianNoise{0.2}};
    s.w_star = shared_w_star();
    Alg1Config a;
    a.family = family;
    a.radius = radius > 0.0 ? radius : default_radius(s);
    a.mu = default_alg1_gain(family, feature_bound(regime), a.radius);
    cfg.learner = a;
    validate_config(cfg);
    return cfg;
}

ExperimentConfig drifting_config()
{
    ExperimentConfig cfg;
    StreamSpec& s = cfg.stream;
    s.stream_case = StreamCase::Drifting;
    s.dim = 5;
    s.num_tasks = 5000;
    s.samples_per_task = 10;
    s.family = LinearLoss{};
    s.regime = BoundedUniformFeatures{1.0};
    s.noise = GaussianNoise{0.2};
    s.meta = {Vector{{1.0, 0.0, 0.5, -0.5, 0.0}}, Vector{{-0.5, 1.0, 0.0, 0.5, 0.5}},
              Vector{{0.0, -0.5, 1.0, 0.0, -1.0}}};
    s.perturbation_sigma = 0.5;
    s.assignment = GroupAssignment::Uniform;
    s.order = RandomOrder{};
    cfg.learner = Alg2Config{0.0, {}};
    validate_config(cfg);
    return cfg;
}

std::vector<double> checkpoint_ts(const RunResult& run)
{
    std::vector<double> t;
    for (const auto& r : run.records) {
        t.push_back(static_cast<double>(r.t));
    }
    return t;
}

std::vector<double> regret_excess(const RunResult& run)
{
    std::vector<double> v;
    for (const auto& r : run.records) {
        v.push_back(r.regret - r.l_star);
    }
    return v;
}

std::vector<double> forgetting_excess(const RunResult& run)
{
    std::vector<double> v;
    for (const auto& r : run.records) {
        v.push_back(r.forgetting - r.l_star);
    }
    return v;
}

std::string trimmed(const std::string& s)
{
    const auto first = s.find_first_not_of(' ');
    return first == std::string::npos ? std::string() : s.substr(first);
}

bool within(double v, double lo, double hi)
{
    return v >= lo && v <= hi;
}

std::string seed_tag(std::uint64_t seed)
{
    return "s" + std::to_string(seed) + ":";
}

} // namespace

DerivativeTarget derivative_target(const LossFamily& family)
{
    DerivativeTarget t;
    t.name = family_name(family);
    t.value = [family](double xi, double y) { return loss_value(family, xi, y); };
    t.first = [family](double xi, double y) { return g1(family, xi, y); };
    t.second = [family](double xi, double y) { return g2(family, xi, y); };
    if (std::holds_alternative<LinearLoss>(family)) {
        t.sample = [](double u1, double u2, double) { return std::pair{20.0 * u1 - 10.0, 20.0 * u2 - 10.0}; };
    } else if (std::holds_alternative<LogisticLoss>(family)) {
        t.sample = [](double u1, double u2, double u3) {
            // Half hard labels, half soft.
            const double y = u3 < 0.5 ? (u2 < 0.5 ? 0.0 : 1.0) : u2;
            return std::pair{20.0 * u1 - 10.0, y};
        };
    } else {
        const auto s = std::get<SaturatedLoss>(family);
        t.sample = [s](double u1, double u2, double u3) {
            const double xi = 12.0 * u1 - 6.0;
            if (u3 < 1.0 / 3.0) {
                return std::pair{xi, s.floor_out};
            }
            if (u3 < 2.0 / 3.0) {
                return std::pair{xi, s.ceiling_out};
            }
            double y = s.lower + (s.upper - s.lower) * u2;
            if (y == s.floor_out || y == s.ceiling_out) {
                y = 0.5 * (s.lower + s.upper);
            }
            return std::pair{xi, y};
        };
    }
    return t;
}

CheckResult check_derivatives(const std::vector<DerivativeTarget>& targets, std::size_t points, std::uint64_t seed)
{
    return timed("derivative correctness", 5.0, [&](CheckResult& r) {
        r.passed = true;
        for (const auto& target : targets) {
            double worst1 = 0.0;
            double worst2 = 0.0;
            for (std::size_t k = 0; k < points; ++k) {
                CounterRng rng(make_key(seed, StreamTag::Oracle, 17, k));
                const double u1 = rng.uniform();
                const double u2 = rng.uniform();
                const double u3 = rng.uniform();
                const auto [xi, y] = target.sample(u1, u2, u3);
                const double h = 1e-5 * std::max(1.0, std::abs(xi));
                const double fd1 = oracle::central_difference([&](double z) { return target.value(z, y); }, xi, h);
                const double fd2 = oracle::central_difference([&](double z) { return target.first(z, y); }, xi, h);
                const double a1 = target.first(xi, y);
                const double a2 = target.second(xi, y);
                worst1 = std::max(worst1, std::abs(a1 - fd1) / std::max(1.0, std::abs(a1)));
                worst2 = std::max(worst2, std::abs(a2 - fd2) / std::max(1.0, std::abs(a2)));
            }
            const bool ok = worst1 <= 1e-5 && worst2 <= 1e-5;
            r.passed = r.passed && ok;
            r.detail += " " + target.name + "(g1 " + num(worst1, 2) + ", g2 " + num(worst2, 2) + ")";
        }
    });
}

CheckResult check_derivatives()
{
    return check_derivatives({derivative_target(LinearLoss{}), derivative_target(LogisticLoss{}),
                              derivative_target(SaturatedLoss{-1.0, 1.0, -1.0, 1.0})},
                             10000, 1);
}

CheckResult check_recursive_batch_equivalence()
{
    return timed("recursive/batch equivalence", 5.0, [](CheckResult& r) {
        r.passed = true;
        double worst = 0.0;
        for (std::uint64_t seed : kCheckSeeds) {
            const Eigen::Index d = 5;
            CounterRng rng(make_key(seed, StreamTag::Oracle, 1));
            Vector w_true(d);
            for (Eigen::Index j = 0; j < d; ++j) {
                w_true[j] = 4.0 * rng.uniform() - 2.0;
            }
            std::vector<TaskData> tasks;
            std::vector<double> betas;
            for (std::uint64_t k = 1; k <= 50; ++k) {
                tasks.push_back(generate_task(LinearLoss{}, w_true, 20, BoundedUniformFeatures{1.0}, GaussianNoise{0.3},
                                              seed, k));
                betas.push_back(1.0 - rng.uniform()); // (0, 1]
            }
            LearnerState state = LearnerState::initial(d);
            for (std::size_t k = 0; k < tasks.size(); ++k) {
                state = alg2_update(state, tasks[k], betas[k]);
            }
            const Vector batch = oracle::batch_weighted_ridge(Vector::Zero(d), Matrix::Identity(d, d), tasks, betas);
            const double rel = (state.w - batch).norm() / batch.norm();
            worst = std::max(worst, rel);
        }
        r.passed = worst <= 1e-8;
        r.detail = "max relative error " + num(worst, 3) + " (<= 1e-8)";
    });
}

CheckResult check_alg1_alg2_equivalence()
{
    return timed("alg1/alg2 linear equivalence", 5.0, [](CheckResult& r) {
        double worst = 0.0;
        for (std::uint64_t seed : kCheckSeeds) {
            const Eigen::Index d = 4;
            const Vector w_true{{0.7, -1.2, 0.3, 2.0}};
            LearnerState a = LearnerState::initial(d);
            LearnerState b = LearnerState::initial(d);
            const Alg1Config cfg{1.0, 1e6, LinearLoss{}};
            for (std::uint64_t k = 1; k <= 100; ++k) {
                const TaskData task =
                    generate_task(LinearLoss{}, w_true, 10, BoundedUniformFeatures{2.0}, GaussianNoise{0.5}, seed, k);
                a = alg1_update(a, task, cfg);
                b = alg2_update(b, task, 1.0);
                worst = std::max(worst, (a.w - b.w).cwiseAbs().maxCoeff());
            }
        }
        r.passed = worst <= 1e-10;
        r.detail = "max per-coordinate gap over 100 tasks x 5 seeds " + num(worst, 3) + " (<= 1e-10)";
    });
}

CheckResult check_projection_optimality()
{
    return timed("projection optimality", 30.0, [](CheckResult& r) {
        std::size_t active = 0;
        std::size_t violations = 0;
        double worst_slack = -std::numeric_limits<double>::infinity();
        double worst_norm_excess = -std::numeric_limits<double>::infinity();
        std::normal_distribution<double> normal;
        for (std::uint64_t k = 0; k < 1000; ++k) {
            CounterRng rng(make_key(7, StreamTag::Oracle, 2, k));
            const Eigen::Index d = 2 + static_cast<Eigen::Index>(k % 2);
            Matrix A(d, d);
            for (Eigen::Index i = 0; i < d; ++i) {
                for (Eigen::Index j = 0; j < d; ++j) {
                    A(i, j) = normal(rng);
                }
            }
            const Matrix Q = A * A.transpose() + 0.05 * Matrix::Identity(d, d);
            Vector x(d);
            for (Eigen::Index j = 0; j < d; ++j) {
                x[j] = 3.0 * normal(rng);
            }
            const double radius = 0.2 + 2.8 * rng.uniform();
            const Vector p = project_q_ball(x, Q, radius);
            worst_norm_excess = std::max(worst_norm_excess, p.norm() - radius);
            if (p.norm() > radius + 1e-10) {
                ++violations;
            }
            if (x.norm() <= radius) {
                if (p != x) {
                    ++violations;
                }
                continue;
            }
            ++active;
            const Vector g = oracle::grid_projection(x, Q, radius);
            const double slack = q_norm_sq(x - p, Q) - q_norm_sq(x - g, Q);
            worst_slack = std::max(worst_slack, slack);
            if (slack > 1e-6) {
                ++violations;
            }
            if ((project_q_ball(p, Q, radius) - p).cwiseAbs().maxCoeff() > 1e-12) {
                ++violations;
            }
        }
        r.passed = violations == 0;
        r.detail = std::to_string(active) + " active of 1000; worst Q-distance slack vs grid " + num(worst_slack, 3) +
                   " (<= 1e-6); worst ||P(x)|| - M " + num(worst_norm_excess, 3) + " (<= 1e-10); violations " +
                   std::to_string(violations);
    });
}

CheckResult check_error_trend()
{
    return timed("estimation error trend (bounded features)", 120.0, [](CheckResult& r) {
        const auto cfg = shared_config(LinearLoss{}, BoundedUniformFeatures{1.0}, 0.0);
        r.passed = true;
        for (std::uint64_t seed : kCheckSeeds) {
            const RunResult run = run_experiment(cfg, seed);
            std::vector<double> ratio;
            for (const auto& rec : run.records) {
                if (rec.t >= 100) {
                    ratio.push_back(rec.est_err_sq * rec.lambda_min / std::log(static_cast<double>(rec.t)));
                }
            }
            std::vector<double> sorted = ratio;
            std::sort(sorted.begin(), sorted.end());
            const double median = sorted[sorted.size() / 2];
            const double peak = sorted.back();
            const double final_err = run.records.back().est_err_sq;
            const bool ok = peak <= 10.0 * median && final_err <= 1e-3;
            r.passed = r.passed && ok;
            r.detail += " " + seed_tag(seed) + "max/median " + num(peak / median, 3) + ", final " + num(final_err, 3);
        }
        r.detail += " (need max/median <= 10, final <= 1e-3)";
    });
}

CheckResult check_weak_excitation()
{
    return timed("estimation error under weak excitation", 120.0, [](CheckResult& r) {
        const auto cfg = shared_config(LinearLoss{}, LowExcitationFeatures{1.0, 0.6}, 0.0);
        r.passed = true;
        for (std::uint64_t seed : kCheckSeeds) {
            const RunResult run = run_experiment(cfg, seed);
            const auto& last = run.records.back();
            const bool ok = last.est_err_sq <= 1e-2;
            r.passed = r.passed && ok;
            r.detail += " " + seed_tag(seed) + "final " + num(last.est_err_sq, 3) + " lambda_min/m " +
                        num(last.lambda_min / static_cast<double>(last.t), 3) + " lambda_min/log m " +
                        num(last.lambda_min / std::log(static_cast<double>(last.t)), 3);
        }
        r.detail += " (need final <= 1e-2)";
    });
}

CheckResult check_shared_rates()
{
    return timed("forgetting and regret rates (shared minimizer)", 180.0, [](CheckResult& r) {
        const auto cfg = shared_config(LinearLoss{}, BoundedUniformFeatures{1.0}, 0.0);
        r.passed = true;
        for (std::uint64_t seed : kCheckSeeds) {
            const RunResult run = run_experiment(cfg, seed);
            const auto t = checkpoint_ts(run);
            const RateFit regret_fit = rate_fit(t, regret_excess(run));
            const bool regret_ok = within(regret_fit.exponent, -1.3, -0.7);
            r.detail += " " + seed_tag(seed) + "regret " + num(regret_fit.exponent, 3);

            const auto fexcess = forgetting_excess(run);
            bool forget_ok = false;
            try {
                const RateFit fit = rate_fit(t, fexcess);
                forget_ok = within(fit.exponent, -0.8, -0.3);
                r.detail += ", forgetting " + num(fit.exponent, 3);
            } catch (const InvalidArgument&) {
                const std::size_t half = fexcess.size() / 2;
                const auto negatives = static_cast<std::size_t>(
                    std::count_if(fexcess.begin() + static_cast<std::ptrdiff_t>(half), fexcess.end(),
                                  [](double v) { return v <= 0.0; }));
                std::vector<double> magnitude(fexcess.size());
                std::transform(fexcess.begin(), fexcess.end(), magnitude.begin(), [](double v) { return std::abs(v); });
                r.detail += ", forgetting excess <= 0 at " + std::to_string(negatives) + "/" +
                            std::to_string(fexcess.size() - half) + " window points (|F-L*| exponent " +
                            num(rate_fit(t, magnitude).exponent, 3) + ")";
            }
            r.passed = r.passed && regret_ok && forget_ok;
        }
        r.detail += " (need regret in [-1.3,-0.7], forgetting in [-0.8,-0.3])";
    });
}

CheckResult check_nonlinear_regret()
{
    return timed("regret rate (logistic, saturated)", 300.0, [](CheckResult& r) {
        r.passed = true;
        // Radius 2.5 covers ||w*|| and keeps the curvature floor away from zero.
        for (const LossFamily& family : {LossFamily{LogisticLoss{}}, LossFamily{SaturatedLoss{-1.0, 1.0, -1.0, 1.0}}}) {
            const auto cfg = shared_config(family, BoundedUniformFeatures{1.0}, 2.5);
            r.detail += " " + family_name(family) + "[";
            for (std::uint64_t seed : kCheckSeeds) {
                const RunResult run = run_experiment(cfg, seed);
                const RateFit fit = rate_fit(checkpoint_ts(run), regret_excess(run));
                r.passed = r.passed && within(fit.exponent, -1.3, -0.6);
                r.detail += " " + num(fit.exponent, 3);
            }
            r.detail += " ]";
        }
        r.detail += " (need regret exponent in [-1.3,-0.6])";
    });
}

CheckResult check_drifting_target()
{
    return timed("drifting parameters (approximate minimizer)", 180.0, [](CheckResult& r) {
        const auto cfg = drifting_config();
        r.passed = true;
        for (std::uint64_t seed : kCheckSeeds) {
            const RunResult run = run_experiment(cfg, seed);
            const double final_err = run.records.back().est_err_sq;
            const RateFit fit = rate_fit(checkpoint_ts(run), regret_excess(run));
            const bool ordered = std::all_of(run.records.begin(), run.records.end(),
                                             [](const MetricsRecord& rec) { return rec.p_star <= rec.l_star; });
            const bool ok = final_err <= 1e-2 && within(fit.exponent, -1.3, -0.7) && ordered;
            r.passed = r.passed && ok;
            r.detail += " " + seed_tag(seed) + "final " + num(final_err, 3) + ", regret " + num(fit.exponent, 3) +
                        (ordered ? ", P*<=L*" : ", P*>L* somewhere");
        }
        r.detail += " (need final <= 1e-2, regret in [-1.3,-0.7], P* <= L* everywhere)";
    });
}

CheckResult check_group_demo()
{
    return timed("three-group demo", 60.0, [](CheckResult& r) {
        r.passed = true;
        const Vector quoted = group_demo_quoted_target();
        for (bool random_order : {false, true}) {
            int close = 0;
            int oscillating = 0;
            std::string alg2_detail;
            std::string sgd_detail;
            for (std::uint64_t seed : kCheckSeeds) {
                const auto cfg = group_demo_config(random_order, false, seed);
                const RunResult run = run_experiment(cfg, seed);
                const double dist = (run.final_state.w - run.target).norm();
                close += dist < 0.2 ? 1 : 0;
                alg2_detail += " " + num(dist, 3) + "/" + num((run.final_state.w - quoted).norm(), 3);

                const RunResult sgd = run_experiment(group_demo_config(random_order, true, seed), seed);
                int far = 0;
                for (std::size_t k = sgd.trajectory.size() - 50; k < sgd.trajectory.size(); ++k) {
                    far += (sgd.trajectory[k] - sgd.target).norm() > 0.5 ? 1 : 0;
                }
                oscillating += far >= 10 ? 1 : 0;
                sgd_detail += " " + std::to_string(far);
            }
            const bool ok = close >= 4 && oscillating == 5;
            r.passed = r.passed && ok;
            r.detail += std::string(random_order ? " random" : " sequential") + ": alg2 dist target/quoted" +
                        alg2_detail + " (" + std::to_string(close) + "/5 < 0.2); sgd far stages of last 50" +
                        sgd_detail + ";";
        }
    });
}

CheckResult check_reproducibility()
{
    return timed("reproducibility", 60.0, [](CheckResult& r) {
        namespace fs = std::filesystem;
        const fs::path root = fs::temp_directory_path() / ("conlearn_repro_" + std::to_string(::getpid()));
        std::vector<ExperimentConfig> configs;
        {
            auto c = drifting_config();
            c.stream.num_tasks = 200;
            c.replicate_seeds = {11, 12};
            configs.push_back(c);
        }
        {
            auto c = shared_config(LogisticLoss{}, BoundedUniformFeatures{1.0}, 2.5);
            c.stream.num_tasks = 300;
            c.replicate_seeds = {3};
            configs.push_back(c);
        }
        configs.push_back(group_demo_config(true, true, 9));

        r.passed = true;
        std::size_t files = 0;
        for (std::size_t i = 0; i < configs.size(); ++i) {
            std::string contents[2];
            for (int pass = 0; pass < 2; ++pass) {
                auto cfg = configs[i];
                cfg.output = (root / ("c" + std::to_string(i) + "_" + std::to_string(pass))).string();
                run_replicates(cfg);
                for (std::uint64_t seed : resolved_seeds(cfg)) {
                    std::ifstream in(fs::path(cfg.output) / ("metrics_" + std::to_string(seed) + ".csv"),
                                     std::ios::binary);
                    contents[pass] += std::string(std::istreambuf_iterator<char>(in), {});
                }
            }
            files += resolved_seeds(configs[i]).size();
            r.passed = r.passed && !contents[0].empty() && contents[0] == contents[1];
        }
        fs::remove_all(root);
        r.detail = std::to_string(files) + " metrics CSVs compared byte-for-byte across two runs";
    });
}

const std::vector<NamedCheck>& all_checks()
{
    static const std::vector<NamedCheck> checks = {
        {"derivatives", true, [] { return check_derivatives(); }},
        {"recursive_batch", true, [] { return check_recursive_batch_equivalence(); }},
        {"alg1_alg2", true, [] { return check_alg1_alg2_equivalence(); }},
        {"projection", true, [] { return check_projection_optimality(); }},
        {"error_trend", false, [] { return check_error_trend(); }},
        {"weak_excitation", false, [] { return check_weak_excitation(); }},
        {"shared_rates", false, [] { return check_shared_rates(); }},
        {"nonlinear_regret", false, [] { return check_nonlinear_regret(); }},
        {"drifting_target", false, [] { return check_drifting_target(); }},
        {"group_demo", true, [] { return check_group_demo(); }},
        {"reproducibility", true, [] { return check_reproducibility(); }},
    };
    return checks;
}

void print_result(const CheckResult& r, std::ostream& out)
{
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " [" << std::fixed << std::setprecision(2) << r.seconds
        << " s]" << std::defaultfloat << ": " << trimmed(r.detail) << "\n";
    out.flush();
}

std::vector<CheckResult> verify_suite(VerifyLevel level, std::ostream& log)
{
    std::vector<CheckResult> results;
    for (const auto& check : all_checks()) {
        if (level == VerifyLevel::Quick && !check.quick) {
            continue;
        }
        CheckResult r = check.run();
        print_result(r, log);
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace conlearn
