#include "conlearn/config.hpp"
#include "conlearn/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <string>

using namespace conlearn;
using nlohmann::json;

namespace {

json minimal()
{
    return json::parse(R"({
        "stream": {
            "case": 1, "dim": 2, "num_tasks": 10, "samples_per_task": 3,
            "family": {"kind": "linear"},
            "features": {"kind": "bounded_uniform", "bound": 1.0},
            "noise": {"kind": "gaussian", "sigma": 0.1},
            "w_star": [1.0, -1.0]
        },
        "learner": {"kind": "alg1"}
    })");
}

std::string error_path(const json& doc)
{
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<accepted>";
}

} // namespace

TEST_CASE("minimal config fills defaults")
{
    const ExperimentConfig cfg = parse_config(minimal());
    const auto& a = std::get<Alg1Config>(cfg.learner);
    CHECK(a.mu == 1.0);
    CHECK(a.radius == doctest::Approx(10.0 * std::sqrt(2.0)));
    CHECK(resolved_seeds(cfg) == std::vector<std::uint64_t>{0});
    CHECK(checkpoint_interval(cfg.checkpoints, 10) == 1);
    CHECK(checkpoint_interval(cfg.checkpoints, 5000) == 25);
    CHECK(checkpoint_interval(CheckpointSpec{7}, 5000) == 7);
}

TEST_CASE("config round trip")
{
    for (const auto& entry : std::filesystem::directory_iterator(CONLEARN_CONFIG_DIR)) {
        CAPTURE(entry.path().string());
        const ExperimentConfig cfg = load_config(entry.path().string());
        const json echo = config_to_json(cfg);
        CHECK(config_to_json(parse_config(echo)) == echo);
    }
}

TEST_CASE("config errors name the field")
{
    json doc = minimal();
    doc["stream"]["dimension"] = 3;
    CHECK(error_path(doc) == "stream.dimension");

    doc = minimal();
    doc["stream"].erase("w_star");
    CHECK(error_path(doc) == "stream.w_star");

    doc = minimal();
    doc["stream"]["w_star"] = json::array({1.0, 2.0, 3.0});
    CHECK(error_path(doc) == "stream.w_star");

    doc = minimal();
    doc["stream"]["noise"]["sigma"] = "big";
    CHECK(error_path(doc) == "stream.noise.sigma");

    doc = minimal();
    doc["learner"] = json{{"kind", "alg2"}};
    doc["stream"]["family"] = json{{"kind", "logistic"}};
    CHECK(error_path(doc).rfind("learner", 0) == 0);

    doc = minimal();
    doc["learner"]["radius"] = 0.5;
    CHECK(error_path(doc).rfind("learner", 0) == 0);

    doc = minimal();
    doc["stream"]["family"] = json{{"kind", "saturated"}, {"lower", -1}, {"upper", 1},
                                   {"floor_output", -1}, {"ceiling_output", 1}};
    CHECK(error_path(doc) == "stream.noise");

    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
