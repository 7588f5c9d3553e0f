#include "conlearn/errors.hpp"
#include "conlearn/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace conlearn;

namespace {

ExperimentConfig tiny(std::size_t m)
{
    ExperimentConfig cfg;
    cfg.stream.dim = 2;
    cfg.stream.num_tasks = m;
    cfg.stream.samples_per_task = 4;
    cfg.stream.w_star = Vector{{0.5, 1.0}};
    cfg.stream.seed = 2;
    cfg.learner = Alg1Config{};
    return cfg;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("one-task run")
{
    const RunResult run = run_experiment(tiny(1), 2);
    REQUIRE(run.records.size() == 1);
    CHECK(run.records[0].t == 1);
    CHECK(run.records[0].regret > 0.0);
    CHECK(run.records[0].forgetting > 0.0);
    CHECK(run.trajectory.size() == 2);
}

TEST_CASE("case-1 baselines coincide")
{
    const RunResult run = run_experiment(tiny(30), 2);
    for (const auto& r : run.records) {
        CHECK(r.p_star == r.l_star);
    }
}

TEST_CASE("metrics csv round trip and schema checks")
{
    const RunResult run = run_experiment(tiny(20), 5);
    const std::string text = render_metrics_csv(run);
    CHECK(text.rfind(std::string(kMetricsHeader) + "\n", 0) == 0);
    const MetricsTable table = parse_metrics_csv(text);
    REQUIRE(table.records.size() == run.records.size());
    for (std::size_t i = 0; i < run.records.size(); ++i) {
        CHECK(table.records[i].regret == run.records[i].regret);
        CHECK(table.records[i].lambda_min == run.records[i].lambda_min);
    }

    std::string swapped = text;
    swapped.replace(swapped.find("forgetting,regret"), 17, "regret,forgetting");
    try {
        parse_metrics_csv(swapped);
        FAIL("permuted header accepted");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("forgetting") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_metrics_csv(""), InvalidArgument);
}

TEST_CASE("replicates write deterministic files")
{
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "conlearn_harness_test";
    fs::remove_all(root);
    ExperimentConfig cfg = tiny(40);
    cfg.replicate_seeds = {1, 2, 3};
    std::string first;
    for (int pass = 0; pass < 2; ++pass) {
        cfg.output = (root / std::to_string(pass)).string();
        const auto runs = run_replicates(cfg);
        CHECK(runs.size() == 3);
        std::string all;
        for (std::uint64_t s : cfg.replicate_seeds) {
            all += slurp(fs::path(cfg.output) / ("metrics_" + std::to_string(s) + ".csv"));
            all += slurp(fs::path(cfg.output) / ("trajectory_" + std::to_string(s) + ".csv"));
        }
        CHECK(fs::exists(fs::path(cfg.output) / "summary.json"));
        CHECK(fs::exists(fs::path(cfg.output) / "config_echo.json"));
        if (pass == 0) {
            first = all;
        } else {
            CHECK(all == first);
        }
    }
    fs::remove_all(root);
}

TEST_CASE("demo configuration")
{
    const ExperimentConfig cfg = group_demo_config(true, false, 1);
    CHECK(cfg.stream.num_tasks == 100);
    CHECK(cfg.stream.samples_per_task == 200);
    const RunResult run = run_experiment(cfg, 1);
    CHECK(run.target[0] == doctest::Approx(25.0 / 6.0));
    CHECK(run.target[1] == doctest::Approx(-1.0 / 6.0));
    CHECK((run.final_state.w - run.target).norm() < 0.2);

    const RunResult sgd = run_experiment(group_demo_config(true, true, 1), 1);
    int far = 0;
    for (std::size_t k = sgd.trajectory.size() - 50; k < sgd.trajectory.size(); ++k) {
        far += (sgd.trajectory[k] - sgd.target).norm() > 0.5 ? 1 : 0;
    }
    CHECK(far >= 10);
}
