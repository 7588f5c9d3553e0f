#include "conlearn/errors.hpp"
#include "conlearn/harness.hpp"
#include "conlearn/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace conlearn;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;

void print_fits(const std::map<std::string, RateFit>& fits, const std::map<std::string, std::string>& errors)
{
    for (const auto& [name, fit] : fits) {
        std::printf("  %-18s exponent %+.4f  r2 %.4f  window [%zu, %zu)\n", name.c_str(), fit.exponent,
                    fit.r_squared, fit.window_begin, fit.window_end);
    }
    for (const auto& [name, err] : errors) {
        std::printf("  %-18s no fit: %s\n", name.c_str(), err.c_str());
    }
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& output)
{
    ExperimentConfig cfg = load_config(path);
    if (seed) {
        cfg.replicate_seeds = {*seed};
    }
    if (!output.empty()) {
        cfg.output = output;
    }
    const auto runs = run_replicates(cfg);
    for (const auto& run : runs) {
        const auto& last = run.records.back();
        std::printf("seed %llu  %s  t=%zu  est_err_sq %.6g  regret %.6g  forgetting %.6g%s\n",
                    static_cast<unsigned long long>(run.seed), run.learner.c_str(), last.t, last.est_err_sq,
                    last.regret, last.forgetting, run.status == RunStatus::Diverged ? "  (diverged)" : "");
        print_fits(run.rate_fits, run.rate_fit_errors);
    }
    std::printf("wrote %s\n", cfg.output.c_str());
    return kOk;
}

int cmd_verify(const std::string& level, const std::vector<std::string>& only)
{
    std::vector<CheckResult> results;
    if (!only.empty()) {
        for (const auto& name : only) {
            bool found = false;
            for (const auto& check : all_checks()) {
                if (check.name == name) {
                    found = true;
                    auto r = check.run();
                    print_result(r, std::cout);
                    results.push_back(r);
                }
            }
            if (!found) {
                std::cerr << "unknown check: " << name << "\n";
                return kConfigError;
            }
        }
    } else {
        results = verify_suite(level == "full" ? VerifyLevel::Full : VerifyLevel::Quick, std::cout);
    }
    for (const auto& r : results) {
        if (!r.passed) {
            return kCheckFailed;
        }
    }
    return kOk;
}

int cmd_demo(const std::string& order, const std::string& learner, std::uint64_t seed, const std::string& output)
{
    ExperimentConfig cfg = group_demo_config(order == "random", learner == "sgd", seed);
    cfg.replicate_seeds = {seed};
    cfg.output = output;
    const auto runs = run_replicates(cfg);
    const auto& run = runs.front();
    const Vector quoted = group_demo_quoted_target();
    std::printf("%s, %s order, seed %llu\n", run.learner.c_str(), order.c_str(),
                static_cast<unsigned long long>(seed));
    std::printf("  final w            [%.4f, %.4f]\n", run.final_state.w[0], run.final_state.w[1]);
    std::printf("  mean of metas      [%.4f, %.4f]  distance %.4f\n", run.target[0], run.target[1],
                (run.final_state.w - run.target).norm());
    std::printf("  quoted minimizer   [%.4f, %.4f]  distance %.4f\n", quoted[0], quoted[1],
                (run.final_state.w - quoted).norm());
    std::printf("wrote %s\n", cfg.output.c_str());
    return kOk;
}

int cmd_rates(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidArgument("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const MetricsTable table = parse_metrics_csv(buf.str());
    std::map<std::string, RateFit> fits;
    std::map<std::string, std::string> errors;
    fit_standard_rates(table.records, fits, errors);
    std::printf("%s: %zu checkpoints\n", path.c_str(), table.records.size());
    print_fits(fits, errors);
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Continual learning with recursive second-order updates"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed, "Override the seed (single replicate)");

    std::string config_path;
    std::string run_output;
    auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
    run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output", run_output, "Output directory (overrides the config)");

    std::string level = "quick";
    std::vector<std::string> only;
    auto* verify = app.add_subcommand("verify", "Run the built-in verification checks");
    verify->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
    verify->add_option("--check", only, "Run only the named check(s)");

    std::string order = "sequential";
    std::string learner = "alg2";
    std::string demo_output = "out/group_demo";
    auto* demo = app.add_subcommand("demo-figure2", "Drifting-parameter demo with three groups in d = 2");
    demo->add_option("--order", order)->check(CLI::IsMember({"sequential", "random"}));
    demo->add_option("--learner", learner)->check(CLI::IsMember({"alg2", "sgd"}));
    demo->add_option("-o,--output", demo_output);

    std::string csv_path;
    auto* rates = app.add_subcommand("rates", "Fit decay exponents to a metrics CSV");
    rates->add_option("csv", csv_path)->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (run->parsed()) {
            return cmd_run(config_path, seed, run_output);
        }
        if (verify->parsed()) {
            return cmd_verify(level, only);
        }
        if (demo->parsed()) {
            return cmd_demo(order, learner, seed.value_or(1), demo_output);
        }
        return cmd_rates(csv_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCheckFailed;
    }
}
