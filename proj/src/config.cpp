#include "conlearn/config.hpp"

#include "conlearn/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace conlearn {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// Object reader that remembers which keys were consumed so leftovers can be reported.
class Fields {
public:
    Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path))
    {
        if (!obj_.is_object()) {
            throw ConfigError(path_, "expected an object");
        }
    }

    ~Fields() = default;
    Fields(const Fields&) = delete;
    Fields& operator=(const Fields&) = delete;

    std::string at(const std::string& key) const { return path_ + "." + key; }

    bool has(const std::string& key) const { return obj_.contains(key); }

    const json& get(const std::string& key)
    {
        if (!obj_.contains(key)) {
            throw ConfigError(at(key), "missing required field");
        }
        seen_.insert(key);
        return obj_.at(key);
    }

    double number(const std::string& key)
    {
        const json& v = get(key);
        if (!v.is_number()) {
            throw ConfigError(at(key), "expected a number");
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            throw ConfigError(at(key), "expected a finite number");
        }
        return x;
    }

    double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::int64_t integer(const std::string& key)
    {
        const json& v = get(key);
        if (!v.is_number_integer()) {
            throw ConfigError(at(key), "expected an integer");
        }
        return v.get<std::int64_t>();
    }

    std::uint64_t unsigned_integer(const std::string& key)
    {
        const json& v = get(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            throw ConfigError(at(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::string string(const std::string& key)
    {
        const json& v = get(key);
        if (!v.is_string()) {
            throw ConfigError(at(key), "expected a string");
        }
        return v.get<std::string>();
    }

    void finish() const
    {
        for (const auto& [key, _] : obj_.items()) {
            if (!seen_.contains(key)) {
                throw ConfigError(at(key), "unknown key");
            }
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

Vector parse_vector(const json& v, const std::string& path)
{
    if (!v.is_array() || v.empty()) {
        throw ConfigError(path, "expected a nonempty array of numbers");
    }
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
            throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a finite number");
        }
        out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
}

json vector_json(const Vector& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

LossFamily parse_family(const json& node, const std::string& path, GenerationOptions& gen)
{
    Fields f(node, path);
    const std::string kind = f.string("kind");
    LossFamily family;
    if (kind == "linear") {
        family = LinearLoss{};
    } else if (kind == "logistic") {
        family = LogisticLoss{};
        if (f.has("noise_mode")) {
            const std::string mode = f.string("noise_mode");
            if (mode == "bernoulli") {
                gen.logistic_noise = LogisticNoiseMode::Bernoulli;
            } else if (mode == "truncated_additive") {
                gen.logistic_noise = LogisticNoiseMode::TruncatedAdditive;
            } else {
                throw ConfigError(f.at("noise_mode"), "expected \"bernoulli\" or \"truncated_additive\"");
            }
        }
    } else if (kind == "saturated") {
        SaturatedLoss s;
        s.lower = f.number("lower");
        s.upper = f.number("upper");
        s.floor_out = f.number_or("floor_output", s.lower);
        s.ceiling_out = f.number_or("ceiling_output", s.upper);
        family = s;
    } else {
        throw ConfigError(f.at("kind"), "expected \"linear\", \"logistic\" or \"saturated\"");
    }
    f.finish();
    try {
        validate_family(family);
    } catch (const InvalidArgument& e) {
        throw ConfigError(path, e.what());
    }
    return family;
}

FeatureRegime parse_regime(const json& node, const std::string& path, Eigen::Index dim)
{
    Fields f(node, path);
    const std::string kind = f.string("kind");
    FeatureRegime regime;
    if (kind == "bounded_uniform") {
        regime = BoundedUniformFeatures{f.number("bound")};
    } else if (kind == "gaussian") {
        GaussianFeatures g;
        if (f.has("covariance")) {
            const json& rows = f.get("covariance");
            if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != dim) {
                throw ConfigError(f.at("covariance"), "expected dim rows");
            }
            g.covariance.resize(dim, dim);
            for (Eigen::Index i = 0; i < dim; ++i) {
                const std::string rp = f.at("covariance") + "[" + std::to_string(i) + "]";
                Vector row = parse_vector(rows[static_cast<std::size_t>(i)], rp);
                if (row.size() != dim) {
                    throw ConfigError(rp, "expected dim entries");
                }
                g.covariance.row(i) = row.transpose();
            }
        } else {
            const double scale = f.number_or("scale", 1.0);
            g.covariance = Matrix::Identity(dim, dim) * (scale * scale);
        }
        regime = g;
    } else if (kind == "low_excitation") {
        regime = LowExcitationFeatures{f.number("bound"), f.number("rho")};
    } else {
        throw ConfigError(f.at("kind"), "expected \"bounded_uniform\", \"gaussian\" or \"low_excitation\"");
    }
    f.finish();
    try {
        validate_regime(regime, dim);
    } catch (const InvalidArgument& e) {
        throw ConfigError(path, e.what());
    }
    return regime;
}

NoiseSpec parse_noise(const json& node, const std::string& path)
{
    Fields f(node, path);
    const std::string kind = f.string("kind");
    NoiseSpec noise;
    if (kind == "gaussian") {
        noise = GaussianNoise{f.number("sigma")};
    } else if (kind == "uniform") {
        noise = UniformNoise{f.number("halfwidth")};
    } else if (kind == "student_t") {
        noise = StudentTNoise{f.number("dof"), f.number_or("scale", 1.0)};
    } else {
        throw ConfigError(f.at("kind"), "expected \"gaussian\", \"uniform\" or \"student_t\"");
    }
    f.finish();
    try {
        validate_noise(noise);
    } catch (const InvalidArgument& e) {
        throw ConfigError(path, e.what());
    }
    return noise;
}

TaskOrder parse_order(const json& node, const std::string& path)
{
    if (node.is_string()) {
        const auto s = node.get<std::string>();
        if (s == "sequential") {
            return SequentialOrder{};
        }
        if (s == "random") {
            return RandomOrder{};
        }
        throw ConfigError(path, "expected \"sequential\" or \"random\"");
    }
    Fields f(node, path);
    const std::string kind = f.string("kind");
    TaskOrder order;
    if (kind == "sequential") {
        order = SequentialOrder{};
    } else if (kind == "random") {
        RandomOrder r;
        if (f.has("seed")) {
            r.seed = f.unsigned_integer("seed");
        }
        order = r;
    } else {
        throw ConfigError(f.at("kind"), "expected \"sequential\" or \"random\"");
    }
    f.finish();
    return order;
}

StreamSpec parse_stream(const json& node, const std::string& path)
{
    Fields f(node, path);
    StreamSpec s;
    const auto which = f.integer("case");
    if (which != 1 && which != 2) {
        throw ConfigError(f.at("case"), "expected 1 or 2");
    }
    s.stream_case = which == 1 ? StreamCase::Shared : StreamCase::Drifting;

    const auto dim = f.integer("dim");
    if (dim < 1 || dim > 256) {
        throw ConfigError(f.at("dim"), "expected an integer in [1, 256]");
    }
    s.dim = dim;
    const auto m = f.integer("num_tasks");
    if (m < 1) {
        throw ConfigError(f.at("num_tasks"), "expected >= 1");
    }
    s.num_tasks = static_cast<std::size_t>(m);
    const auto n = f.integer("samples_per_task");
    if (n < 0) {
        throw ConfigError(f.at("samples_per_task"), "expected >= 0");
    }
    s.samples_per_task = n;

    s.family = parse_family(f.get("family"), f.at("family"), s.generation);
    s.regime = parse_regime(f.get("features"), f.at("features"), s.dim);
    if (f.has("noise")) {
        s.noise = parse_noise(f.get("noise"), f.at("noise"));
        if (std::holds_alternative<SaturatedLoss>(s.family)) {
            const auto* g = std::get_if<GaussianNoise>(&s.noise);
            if (g == nullptr || g->sigma != 1.0) {
                throw ConfigError(f.at("noise"), "the saturated family uses standard normal noise only");
            }
        }
    } else if (std::holds_alternative<SaturatedLoss>(s.family)) {
        s.noise = GaussianNoise{1.0};
    } else if (std::holds_alternative<LogisticLoss>(s.family) &&
               s.generation.logistic_noise == LogisticNoiseMode::Bernoulli) {
        // unused: Bernoulli labels carry their own noise
    } else {
        throw ConfigError(f.at("noise"), "missing required field");
    }

    if (s.stream_case == StreamCase::Shared) {
        s.w_star = parse_vector(f.get("w_star"), f.at("w_star"));
        if (s.w_star.size() != s.dim) {
            throw ConfigError(f.at("w_star"), "expected dim entries");
        }
    } else {
        const json& metas = f.get("meta");
        if (!metas.is_array() || metas.empty()) {
            throw ConfigError(f.at("meta"), "case 2 needs a nonempty array of meta parameters");
        }
        for (std::size_t i = 0; i < metas.size(); ++i) {
            const std::string mp = f.at("meta") + "[" + std::to_string(i) + "]";
            Vector v = parse_vector(metas[i], mp);
            if (v.size() != s.dim) {
                throw ConfigError(mp, "expected dim entries");
            }
            s.meta.push_back(std::move(v));
        }
        s.perturbation_sigma = f.number_or("perturbation_sigma", 0.0);
        if (s.perturbation_sigma < 0.0) {
            throw ConfigError(f.at("perturbation_sigma"), "expected >= 0");
        }
        if (f.has("assignment")) {
            const auto a = f.string("assignment");
            if (a == "uniform") {
                s.assignment = GroupAssignment::Uniform;
            } else if (a == "balanced") {
                s.assignment = GroupAssignment::Balanced;
            } else {
                throw ConfigError(f.at("assignment"), "expected \"uniform\" or \"balanced\"");
            }
        }
    }
    if (f.has("order")) {
        s.order = parse_order(f.get("order"), f.at("order"));
    }
    s.seed = f.has("seed") ? f.unsigned_integer("seed") : 0;
    f.finish();
    return s;
}

LearnerConfig parse_learner(const json& node, const std::string& path, const StreamSpec& stream)
{
    Fields f(node, path);
    const std::string kind = f.string("kind");
    LearnerConfig learner;
    if (kind == "alg1") {
        Alg1Config c;
        c.family = stream.family;
        c.radius = f.has("radius") ? f.number("radius") : default_radius(stream);
        if (!(c.radius > 0.0)) {
            throw ConfigError(f.at("radius"), "expected > 0");
        }
        if (f.has("mu")) {
            c.mu = f.number("mu");
            if (!(c.mu > 0.0)) {
                throw ConfigError(f.at("mu"), "expected > 0");
            }
        } else {
            try {
                c.mu = default_alg1_gain(stream.family, feature_bound(stream.regime), c.radius);
            } catch (const InvalidArgument&) {
                throw ConfigError(f.at("mu"), "required for a nonlinear family with unbounded features");
            }
        }
        learner = c;
    } else if (kind == "alg2") {
        Alg2Config c;
        c.delta = f.number_or("delta", 0.0);
        if (!(c.delta >= 0.0 && c.delta < 0.5)) {
            throw ConfigError(f.at("delta"), "expected a value in [0, 0.5)");
        }
        if (f.has("betas")) {
            const Vector b = parse_vector(f.get("betas"), f.at("betas"));
            if (static_cast<std::size_t>(b.size()) < stream.num_tasks) {
                throw ConfigError(f.at("betas"), "needs one entry per task");
            }
            for (Eigen::Index i = 0; i < b.size(); ++i) {
                if (!(b[i] > 0.0)) {
                    throw ConfigError(f.at("betas") + "[" + std::to_string(i) + "]", "expected > 0");
                }
            }
            c.betas.assign(b.data(), b.data() + b.size());
        }
        learner = c;
    } else if (kind == "sgd") {
        SgdConfig c;
        c.family = stream.family;
        c.lr = f.number_or("lr", 0.01);
        if (!(c.lr > 0.0)) {
            throw ConfigError(f.at("lr"), "expected > 0");
        }
        c.passes = f.has("passes") ? static_cast<int>(f.integer("passes")) : 5;
        if (c.passes < 1) {
            throw ConfigError(f.at("passes"), "expected >= 1");
        }
        learner = c;
    } else {
        throw ConfigError(f.at("kind"), "expected \"alg1\", \"alg2\" or \"sgd\"");
    }
    f.finish();
    return learner;
}

json family_json(const LossFamily& family, const GenerationOptions& gen)
{
    return std::visit(overloaded{
                          [](const LinearLoss&) { return json{{"kind", "linear"}}; },
                          [&](const LogisticLoss&) {
                              return json{{"kind", "logistic"},
                                          {"noise_mode", gen.logistic_noise == LogisticNoiseMode::Bernoulli
                                                             ? "bernoulli"
                                                             : "truncated_additive"}};
                          },
                          [](const SaturatedLoss& s) {
                              return json{{"kind", "saturated"},
                                          {"lower", s.lower},
                                          {"upper", s.upper},
                                          {"floor_output", s.floor_out},
                                          {"ceiling_output", s.ceiling_out}};
                          },
                      },
                      family);
}

json regime_json(const FeatureRegime& regime)
{
    return std::visit(overloaded{
                          [](const BoundedUniformFeatures& b) { return json{{"kind", "bounded_uniform"}, {"bound", b.bound}}; },
                          [](const GaussianFeatures& g) {
                              json rows = json::array();
                              for (Eigen::Index i = 0; i < g.covariance.rows(); ++i) {
                                  rows.push_back(vector_json(g.covariance.row(i).transpose()));
                              }
                              return json{{"kind", "gaussian"}, {"covariance", rows}};
                          },
                          [](const LowExcitationFeatures& l) {
                              return json{{"kind", "low_excitation"}, {"bound", l.bound}, {"rho", l.rho}};
                          },
                      },
                      regime);
}

json noise_json(const NoiseSpec& noise)
{
    return std::visit(overloaded{
                          [](const GaussianNoise& g) { return json{{"kind", "gaussian"}, {"sigma", g.sigma}}; },
                          [](const UniformNoise& u) { return json{{"kind", "uniform"}, {"halfwidth", u.halfwidth}}; },
                          [](const StudentTNoise& t) {
                              return json{{"kind", "student_t"}, {"dof", t.dof}, {"scale", t.scale}};
                          },
                      },
                      noise);
}

} // namespace

double default_radius(const StreamSpec& stream)
{
    const double bound = parameter_norm_bound(stream);
    return bound > 0.0 ? 10.0 * bound : 1.0;
}

std::size_t checkpoint_interval(const CheckpointSpec& spec, std::size_t num_tasks)
{
    if (spec.every > 0) {
        return spec.every;
    }
    return num_tasks <= 200 ? 1 : (num_tasks + 199) / 200;
}

std::vector<std::uint64_t> resolved_seeds(const ExperimentConfig& cfg)
{
    if (cfg.replicate_seeds.empty()) {
        return {cfg.stream.seed};
    }
    return cfg.replicate_seeds;
}

void validate_config(const ExperimentConfig& cfg)
{
    try {
        validate_stream_spec(cfg.stream);
    } catch (const InvalidArgument& e) {
        throw ConfigError("stream", e.what());
    }
    if (std::holds_alternative<Alg2Config>(cfg.learner) && !std::holds_alternative<LinearLoss>(cfg.stream.family)) {
        throw ConfigError("learner.kind", "alg2 requires the linear family");
    }
    if (const auto* a = std::get_if<Alg1Config>(&cfg.learner)) {
        if (cfg.stream.stream_case == StreamCase::Shared && cfg.stream.w_star.norm() > a->radius) {
            throw ConfigError("learner.radius", "projection radius must cover ||w_star||");
        }
    }
    if (cfg.output.empty()) {
        throw ConfigError("output", "expected a directory path");
    }
}

ExperimentConfig parse_config(const json& doc)
{
    Fields f(doc, "$");
    ExperimentConfig cfg;
    cfg.stream = parse_stream(f.get("stream"), "stream");
    cfg.learner = parse_learner(f.get("learner"), "learner", cfg.stream);
    if (f.has("checkpoints")) {
        Fields c(f.get("checkpoints"), "checkpoints");
        if (c.has("every")) {
            const auto every = c.integer("every");
            if (every < 0) {
                throw ConfigError(c.at("every"), "expected >= 0");
            }
            cfg.checkpoints.every = static_cast<std::size_t>(every);
        }
        c.finish();
    }
    if (f.has("output")) {
        cfg.output = f.string("output");
    }
    if (f.has("replicate_seeds")) {
        const json& seeds = f.get("replicate_seeds");
        if (!seeds.is_array()) {
            throw ConfigError("replicate_seeds", "expected an array of non-negative integers");
        }
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            if (!seeds[i].is_number_unsigned()) {
                throw ConfigError("replicate_seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
            }
            cfg.replicate_seeds.push_back(seeds[i].get<std::uint64_t>());
        }
    }
    f.finish();
    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path, "cannot open config file");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path, std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

json config_to_json(const ExperimentConfig& cfg)
{
    const StreamSpec& s = cfg.stream;
    json stream{{"case", s.stream_case == StreamCase::Shared ? 1 : 2},
                {"dim", s.dim},
                {"num_tasks", s.num_tasks},
                {"samples_per_task", s.samples_per_task},
                {"family", family_json(s.family, s.generation)},
                {"features", regime_json(s.regime)},
                {"noise", noise_json(s.noise)},
                {"seed", s.seed}};
    if (!std::holds_alternative<LogisticLoss>(s.family)) {
        stream["family"].erase("noise_mode");
    }
    if (s.stream_case == StreamCase::Shared) {
        stream["w_star"] = vector_json(s.w_star);
    } else {
        json metas = json::array();
        for (const auto& m : s.meta) {
            metas.push_back(vector_json(m));
        }
        stream["meta"] = metas;
        stream["perturbation_sigma"] = s.perturbation_sigma;
        stream["assignment"] = s.assignment == GroupAssignment::Uniform ? "uniform" : "balanced";
    }
    if (const auto* r = std::get_if<RandomOrder>(&s.order)) {
        json order{{"kind", "random"}};
        if (r->seed) {
            order["seed"] = *r->seed;
        }
        stream["order"] = order;
    } else {
        stream["order"] = json{{"kind", "sequential"}};
    }

    json learner = std::visit(overloaded{
                                  [](const Alg1Config& c) {
                                      return json{{"kind", "alg1"}, {"mu", c.mu}, {"radius", c.radius}};
                                  },
                                  [](const Alg2Config& c) {
                                      json j{{"kind", "alg2"}, {"delta", c.delta}};
                                      if (!c.betas.empty()) {
                                          j["betas"] = c.betas;
                                      }
                                      return j;
                                  },
                                  [](const SgdConfig& c) {
                                      return json{{"kind", "sgd"}, {"lr", c.lr}, {"passes", c.passes}};
                                  },
                              },
                              cfg.learner);

    return json{{"stream", stream},
                {"learner", learner},
                {"checkpoints", {{"every", checkpoint_interval(cfg.checkpoints, s.num_tasks)}}},
                {"output", cfg.output},
                {"replicate_seeds", resolved_seeds(cfg)}};
}

} // namespace conlearn
