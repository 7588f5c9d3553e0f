#include "conlearn/harness.hpp"

#include "conlearn/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace conlearn {

using nlohmann::json;

namespace {

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

double parse_real(const std::string& cell, const std::string& column, std::size_t row)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) {
            throw std::invalid_argument(cell);
        }
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("metrics csv: column '" + column + "' row " + std::to_string(row) +
                              ": not a number: '" + cell + "'");
    }
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

json fit_json(const RateFit& fit, const std::vector<MetricsRecord>& records)
{
    return json{{"exponent", fit.exponent},
                {"intercept", fit.intercept},
                {"r_squared", fit.r_squared},
                {"window", {records[fit.window_begin].t, records[fit.window_end - 1].t}}};
}

json vec_json(const Vector& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

} // namespace

unsigned replicate_threads()
{
    unsigned cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CONLEARN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            cap = static_cast<unsigned>(v);
        }
    }
    return cap;
}

RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed)
{
    StreamSpec spec = cfg.stream;
    spec.seed = seed;
    return run_on_stream(cfg, build_stream(spec), seed);
}

RunResult run_on_stream(const ExperimentConfig& cfg, const TaskStream& stream, std::uint64_t seed)
{
    const LossFamily& family = cfg.stream.family;
    const Eigen::Index d = cfg.stream.dim;
    const std::size_t m = stream.tasks.size();
    const std::size_t every = checkpoint_interval(cfg.checkpoints, m);

    RunResult run;
    run.seed = seed;
    run.target = effective_target(stream);

    Learner learner(cfg.learner, Vector::Zero(d));
    run.learner = learner.name();
    RegretAccumulator regret;
    ExcitationTracker excitation(d);
    double l_star_sum = 0.0;
    double p_star_sum = 0.0;
    std::size_t samples_seen = 0;

    run.trajectory.reserve(m + 1);
    run.trajectory.push_back(learner.estimate());
    const std::span<const TaskData> all(stream.tasks);

    for (std::size_t k = 1; k <= m; ++k) {
        const TaskData& task = stream.tasks[k - 1];
        regret.observe(k, learner.estimate(), task, family);
        learner.learn(task);
        excitation.add(task);
        l_star_sum += task_loss(task, run.target, family);
        p_star_sum += task_loss(task, stream.per_task_w[k - 1], family);
        samples_seen += static_cast<std::size_t>(task.size());
        run.trajectory.push_back(learner.estimate());

        if (k % every == 0 || k == m) {
            MetricsRecord rec;
            rec.t = k;
            rec.est_err_sq = (learner.estimate() - run.target).squaredNorm();
            rec.forgetting = forgetting(learner.estimate(), all.first(k), family);
            rec.regret = regret.value();
            rec.lambda_min = excitation.lambda_min();
            rec.q_lambda_min = min_eigenvalue(learner.information());
            rec.l_star = l_star_sum / static_cast<double>(k);
            rec.p_star = p_star_sum / static_cast<double>(k);
            run.records.push_back(rec);
        }
    }
    regret.finalize();

    run.final_state = learner.state();
    if (learner.diverged()) {
        run.status = RunStatus::Diverged;
    }
    if (samples_seen > 0) {
        const auto& last = run.records.back();
        const double per = static_cast<double>(m) / static_cast<double>(samples_seen);
        run.final_forgetting_per_sample = last.forgetting * per;
        run.final_regret_per_sample = last.regret * per;
        run.final_l_star_per_sample = last.l_star * per;
    }
    fit_standard_rates(run.records, run.rate_fits, run.rate_fit_errors);
    return run;
}

void fit_standard_rates(const std::vector<MetricsRecord>& records, std::map<std::string, RateFit>& fits,
                        std::map<std::string, std::string>& errors)
{
    std::vector<double> t;
    std::vector<double> err;
    std::vector<double> regret_excess;
    std::vector<double> forgetting_excess;
    for (const auto& r : records) {
        t.push_back(static_cast<double>(r.t));
        err.push_back(r.est_err_sq);
        regret_excess.push_back(r.regret - r.l_star);
        forgetting_excess.push_back(r.forgetting - r.l_star);
    }
    const auto attempt = [&](const std::string& name, const std::vector<double>& series) {
        try {
            fits[name] = rate_fit(t, series);
        } catch (const InvalidArgument& e) {
            errors[name] = e.what();
        }
    };
    attempt("est_err_sq", err);
    attempt("regret_excess", regret_excess);
    attempt("forgetting_excess", forgetting_excess);
}

std::string render_metrics_csv(const RunResult& run)
{
    std::string out = std::string(kMetricsHeader) + "\n";
    const std::string tail = "," + run.learner + "," + std::to_string(run.seed) + "\n";
    for (const auto& r : run.records) {
        out += std::to_string(r.t) + "," + fmt17(r.est_err_sq) + "," + fmt17(r.forgetting) + "," + fmt17(r.regret) +
               "," + fmt17(r.lambda_min) + "," + fmt17(r.q_lambda_min) + "," + fmt17(r.l_star) + "," +
               fmt17(r.p_star) + tail;
    }
    return out;
}

std::string render_trajectory_csv(const RunResult& run)
{
    std::string out = "t";
    const Eigen::Index d = run.trajectory.empty() ? 0 : run.trajectory.front().size();
    for (Eigen::Index j = 0; j < d; ++j) {
        out += ",w" + std::to_string(j);
    }
    out += "\n";
    for (std::size_t k = 0; k < run.trajectory.size(); ++k) {
        out += std::to_string(k);
        for (Eigen::Index j = 0; j < d; ++j) {
            out += "," + fmt17(run.trajectory[k][j]);
        }
        out += "\n";
    }
    return out;
}

MetricsTable parse_metrics_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw InvalidArgument("metrics csv: empty input");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto header = split(line, ',');
    const auto expected = split(kMetricsHeader, ',');
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i >= header.size()) {
            throw InvalidArgument("metrics csv: missing column " + std::to_string(i) + " '" + expected[i] + "'");
        }
        if (header[i] != expected[i]) {
            throw InvalidArgument("metrics csv: column " + std::to_string(i) + " is '" + header[i] + "', expected '" +
                                  expected[i] + "'");
        }
    }
    if (header.size() != expected.size()) {
        throw InvalidArgument("metrics csv: unexpected extra column '" + header[expected.size()] + "'");
    }

    MetricsTable table;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        ++row;
        const auto cells = split(line, ',');
        if (cells.size() != expected.size()) {
            throw InvalidArgument("metrics csv: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(expected.size()));
        }
        MetricsRecord r;
        const double t = parse_real(cells[0], "t", row);
        if (t < 1 || t != static_cast<double>(static_cast<std::size_t>(t))) {
            throw InvalidArgument("metrics csv: column 't' row " + std::to_string(row) + ": expected a positive integer");
        }
        r.t = static_cast<std::size_t>(t);
        r.est_err_sq = parse_real(cells[1], expected[1], row);
        r.forgetting = parse_real(cells[2], expected[2], row);
        r.regret = parse_real(cells[3], expected[3], row);
        r.lambda_min = parse_real(cells[4], expected[4], row);
        r.q_lambda_min = parse_real(cells[5], expected[5], row);
        r.l_star = parse_real(cells[6], expected[6], row);
        r.p_star = parse_real(cells[7], expected[7], row);
        if (!table.records.empty() && r.t <= table.records.back().t) {
            throw InvalidArgument("metrics csv: column 't' row " + std::to_string(row) + ": not increasing");
        }
        table.records.push_back(r);
        table.learners.push_back(cells[8]);
        table.seeds.push_back(static_cast<std::uint64_t>(parse_real(cells[9], expected[9], row)));
    }
    return table;
}

json summarize(const ExperimentConfig& cfg, const std::vector<RunResult>& runs)
{
    json out;
    out["target"] = vec_json(analytic_target(cfg.stream));
    json list = json::array();
    std::map<std::string, std::vector<double>> exponents;
    for (const auto& run : runs) {
        json r;
        r["seed"] = run.seed;
        r["learner"] = run.learner;
        r["status"] = run.status == RunStatus::Completed ? "completed" : "diverged";
        r["final_estimate"] = vec_json(run.final_state.w);
        r["final_est_err_sq"] = run.records.empty() ? 0.0 : run.records.back().est_err_sq;
        r["distance_to_target"] = (run.final_state.w - run.target).norm();
        if (!run.records.empty()) {
            const auto& last = run.records.back();
            r["final"] = {{"t", last.t},
                          {"forgetting", last.forgetting},
                          {"regret", last.regret},
                          {"l_star", last.l_star},
                          {"p_star", last.p_star},
                          {"lambda_min", last.lambda_min},
                          {"q_lambda_min", last.q_lambda_min}};
        }
        r["per_sample"] = {{"forgetting", run.final_forgetting_per_sample},
                           {"regret", run.final_regret_per_sample},
                           {"l_star", run.final_l_star_per_sample}};
        json fits = json::object();
        for (const auto& [name, fit] : run.rate_fits) {
            fits[name] = fit_json(fit, run.records);
            exponents[name].push_back(fit.exponent);
        }
        r["rate_fits"] = fits;
        r["rate_fit_errors"] = run.rate_fit_errors;
        list.push_back(r);
    }
    out["runs"] = list;
    json medians = json::object();
    for (auto& [name, values] : exponents) {
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        medians[name] = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    }
    out["median_exponent"] = medians;
    return out;
}

std::vector<RunResult> run_replicates(const ExperimentConfig& cfg)
{
    const auto seeds = resolved_seeds(cfg);
    std::vector<RunResult> runs(seeds.size());
    std::vector<std::exception_ptr> failures(seeds.size());

    const unsigned workers = std::min<unsigned>(replicate_threads(), static_cast<unsigned>(seeds.size()));
    std::size_t next = 0;
    std::mutex lock;
    auto worker = [&] {
        for (;;) {
            std::size_t i = 0;
            {
                std::lock_guard guard(lock);
                if (next >= seeds.size()) {
                    return;
                }
                i = next++;
            }
            try {
                runs[i] = run_experiment(cfg, seeds[i]);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        worker();
    }
    for (const auto& f : failures) {
        if (f) {
            std::rethrow_exception(f);
        }
    }

    const std::filesystem::path dir(cfg.output);
    std::filesystem::create_directories(dir);
    for (const auto& run : runs) {
        write_text(dir / ("metrics_" + std::to_string(run.seed) + ".csv"), render_metrics_csv(run));
        write_text(dir / ("trajectory_" + std::to_string(run.seed) + ".csv"), render_trajectory_csv(run));
    }
    write_text(dir / "summary.json", summarize(cfg, runs).dump(2) + "\n");
    write_text(dir / "config_echo.json", config_to_json(cfg).dump(2) + "\n");
    return runs;
}

ExperimentConfig group_demo_config(bool random_order, bool use_sgd, std::uint64_t seed)
{
    ExperimentConfig cfg;
    StreamSpec& s = cfg.stream;
    s.stream_case = StreamCase::Drifting;
    s.dim = 2;
    s.num_tasks = 100;
    s.samples_per_task = 200;
    s.family = LinearLoss{};
    s.regime = GaussianFeatures{Matrix::Identity(2, 2)};
    s.noise = GaussianNoise{0.2};
    s.meta = {Vector{{4.0, 2.0}}, Vector{{5.5, -1.5}}, Vector{{3.0, -1.0}}};
    s.perturbation_sigma = 0.5;
    s.assignment = GroupAssignment::Balanced;
    s.order = random_order ? TaskOrder{RandomOrder{}} : TaskOrder{SequentialOrder{}};
    s.seed = seed;
    if (use_sgd) {
        cfg.learner = SgdConfig{0.01, 5, LinearLoss{}};
    } else {
        cfg.learner = Alg2Config{};
    }
    cfg.output = "group_demo";
    cfg.replicate_seeds = {seed};
    return cfg;
}

Vector group_demo_quoted_target()
{
    return Vector{{4.0, -1.0 / 6.0}};
}

} // namespace conlearn
