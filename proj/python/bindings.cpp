#include "conlearn/algorithms.hpp"
#include "conlearn/config.hpp"
#include "conlearn/errors.hpp"
#include "conlearn/harness.hpp"
#include "conlearn/losses.hpp"
#include "conlearn/metrics.hpp"
#include "conlearn/models.hpp"
#include "conlearn/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

namespace py = pybind11;
using namespace conlearn;

namespace {

py::dict records_to_dict(const std::vector<MetricsRecord>& records)
{
    const auto n = static_cast<Eigen::Index>(records.size());
    Eigen::VectorXd t(n), err(n), forget(n), regret(n), lam(n), qlam(n), ls(n), ps(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = records[static_cast<std::size_t>(i)];
        t[i] = static_cast<double>(r.t);
        err[i] = r.est_err_sq;
        forget[i] = r.forgetting;
        regret[i] = r.regret;
        lam[i] = r.lambda_min;
        qlam[i] = r.q_lambda_min;
        ls[i] = r.l_star;
        ps[i] = r.p_star;
    }
    py::dict d;
    d["t"] = t;
    d["est_err_sq"] = err;
    d["forgetting"] = forget;
    d["regret"] = regret;
    d["lambda_min"] = lam;
    d["q_lambda_min"] = qlam;
    d["l_star"] = ls;
    d["p_star"] = ps;
    return d;
}

py::dict run_to_dict(const RunResult& run)
{
    py::dict d;
    d["seed"] = run.seed;
    d["learner"] = run.learner;
    d["metrics"] = records_to_dict(run.records);
    Matrix traj(static_cast<Eigen::Index>(run.trajectory.size()), run.target.size());
    for (std::size_t k = 0; k < run.trajectory.size(); ++k) {
        traj.row(static_cast<Eigen::Index>(k)) = run.trajectory[k].transpose();
    }
    d["trajectory"] = traj;
    d["w"] = run.final_state.w;
    d["Q"] = run.final_state.Q;
    d["target"] = run.target;
    d["diverged"] = run.status == RunStatus::Diverged;
    py::dict fits;
    for (const auto& [name, fit] : run.rate_fits) {
        fits[py::str(name)] = fit;
    }
    d["rate_fits"] = fits;
    return d;
}

ExperimentConfig config_from(const std::string& text)
{
    return parse_config(nlohmann::json::parse(text));
}

} // namespace

PYBIND11_MODULE(_conlearn, m)
{
    m.doc() = "Continual learners with recursive second-order updates";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<LinearLoss>(m, "LinearLoss").def(py::init<>());
    py::class_<LogisticLoss>(m, "LogisticLoss").def(py::init<>());
    py::class_<SaturatedLoss>(m, "SaturatedLoss")
        .def(py::init([](double lower, double upper, double floor_out, double ceiling_out) {
                 SaturatedLoss s{lower, upper, floor_out, ceiling_out};
                 validate_family(s);
                 return s;
             }),
             py::arg("lower") = -1.0, py::arg("upper") = 1.0, py::arg("floor_output") = -1.0,
             py::arg("ceiling_output") = 1.0)
        .def_readonly("lower", &SaturatedLoss::lower)
        .def_readonly("upper", &SaturatedLoss::upper)
        .def_readonly("floor_output", &SaturatedLoss::floor_out)
        .def_readonly("ceiling_output", &SaturatedLoss::ceiling_out);

    m.def("loss", &loss_value, py::arg("family"), py::arg("xi"), py::arg("y"));
    m.def("g1", &g1, py::arg("family"), py::arg("xi"), py::arg("y"));
    m.def("g2", &g2, py::arg("family"), py::arg("xi"), py::arg("y"));
    m.def("saturation_h", &saturation_h, py::arg("x"));
    m.def(
        "curvature_bounds",
        [](const LossFamily& f, double C) {
            const auto b = curvature_bounds(f, C);
            return py::make_tuple(b.mu_lower, b.mu_upper);
        },
        py::arg("family"), py::arg("C"));

    py::class_<BoundedUniformFeatures>(m, "BoundedUniformFeatures")
        .def(py::init<double>(), py::arg("bound") = 1.0);
    py::class_<GaussianFeatures>(m, "GaussianFeatures").def(py::init<Matrix>(), py::arg("covariance"));
    py::class_<LowExcitationFeatures>(m, "LowExcitationFeatures")
        .def(py::init<double, double>(), py::arg("bound") = 1.0, py::arg("rho") = 0.6);
    py::class_<GaussianNoise>(m, "GaussianNoise").def(py::init<double>(), py::arg("sigma") = 1.0);
    py::class_<UniformNoise>(m, "UniformNoise").def(py::init<double>(), py::arg("halfwidth") = 1.0);
    py::class_<StudentTNoise>(m, "StudentTNoise")
        .def(py::init<double, double>(), py::arg("dof") = 5.0, py::arg("scale") = 1.0);

    py::class_<TaskData>(m, "Task")
        .def(py::init([](Matrix features, Vector outputs) {
                 if (features.rows() != outputs.size()) {
                     throw InvalidArgument("Task: features and outputs differ in length");
                 }
                 TaskData t;
                 t.features = std::move(features);
                 t.outputs = std::move(outputs);
                 t.w_true = Vector::Zero(t.features.cols());
                 return t;
             }),
             py::arg("features"), py::arg("outputs"))
        .def_readonly("features", &TaskData::features)
        .def_readonly("outputs", &TaskData::outputs)
        .def_readonly("w_true", &TaskData::w_true)
        .def("__len__", [](const TaskData& t) { return t.size(); });

    py::class_<GenerationOptions>(m, "GenerationOptions").def(py::init<>());
    m.def("generate_task", &generate_task, py::arg("family"), py::arg("w_true"), py::arg("n"), py::arg("features"),
          py::arg("noise"), py::arg("seed"), py::arg("task_index"), py::arg("options") = GenerationOptions{});

    py::class_<LearnerState>(m, "LearnerState")
        .def(py::init([](const Vector& w0) { return LearnerState::initial(w0); }), py::arg("w0"))
        .def(py::init([](Vector w, Matrix Q, std::size_t t) { return LearnerState{std::move(w), std::move(Q), t}; }),
             py::arg("w"), py::arg("Q"), py::arg("t") = 0)
        .def_readonly("w", &LearnerState::w)
        .def_readonly("Q", &LearnerState::Q)
        .def_readonly("t", &LearnerState::t);

    m.def("project", &project_q_ball, py::arg("x"), py::arg("Q"), py::arg("radius"));
    m.def(
        "alg1_update",
        [](const LearnerState& s, const TaskData& task, const LossFamily& family, double mu, double radius) {
            return alg1_update(s, task, Alg1Config{mu, radius, family});
        },
        py::arg("state"), py::arg("task"), py::arg("family") = LossFamily{LinearLoss{}}, py::arg("mu") = 1.0,
        py::arg("radius") = 10.0);
    m.def("alg2_update", &alg2_update, py::arg("state"), py::arg("task"), py::arg("beta") = 1.0);
    m.def("beta_schedule", &beta_schedule, py::arg("t"), py::arg("delta"));
    m.def(
        "sgd_update",
        [](const Vector& w, const TaskData& task, const LossFamily& family, double lr, int passes) {
            const auto r = sgd_update(w, task, family, lr, passes);
            return py::make_tuple(r.w, r.diverged);
        },
        py::arg("w"), py::arg("task"), py::arg("family") = LossFamily{LinearLoss{}}, py::arg("lr") = 0.01,
        py::arg("passes") = 5);

    py::class_<RateFit>(m, "RateFit")
        .def_readonly("exponent", &RateFit::exponent)
        .def_readonly("intercept", &RateFit::intercept)
        .def_readonly("r_squared", &RateFit::r_squared)
        .def("__repr__", [](const RateFit& f) {
            std::ostringstream os;
            os << "RateFit(exponent=" << f.exponent << ", r_squared=" << f.r_squared << ")";
            return os.str();
        });
    m.def(
        "rate_fit",
        [](const std::vector<double>& t, const std::vector<double>& v) { return rate_fit(t, v); }, py::arg("t"),
        py::arg("values"), "Log-log slope over the trailing half of the series.");

    m.def(
        "run",
        [](const std::string& config_json, std::uint64_t seed) {
            const ExperimentConfig cfg = config_from(config_json);
            RunResult run;
            {
                py::gil_scoped_release release;
                run = run_experiment(cfg, seed);
            }
            return run_to_dict(run);
        },
        py::arg("config_json"), py::arg("seed"), "Runs one seed of a JSON experiment config in memory.");
    m.def(
        "run_replicates",
        [](const std::string& config_json, const std::string& output) {
            ExperimentConfig cfg = config_from(config_json);
            if (!output.empty()) {
                cfg.output = output;
            }
            std::vector<RunResult> runs;
            {
                py::gil_scoped_release release;
                runs = run_replicates(cfg);
            }
            py::list out;
            for (const auto& r : runs) {
                out.append(run_to_dict(r));
            }
            return out;
        },
        py::arg("config_json"), py::arg("output") = "", "Runs every replicate seed and writes CSV output.");
    m.def(
        "normalize_config", [](const std::string& text) { return config_to_json(config_from(text)).dump(); },
        py::arg("config_json"));
    m.def(
        "group_demo_config",
        [](bool random_order, bool sgd, std::uint64_t seed) {
            return config_to_json(group_demo_config(random_order, sgd, seed)).dump();
        },
        py::arg("random_order") = false, py::arg("sgd") = false, py::arg("seed") = 1);

    m.def(
        "verify",
        [](const std::string& level, const std::vector<std::string>& only) {
            py::list out;
            for (const auto& c : all_checks()) {
                const bool wanted = only.empty() ? (level == "full" || c.quick)
                                                 : std::find(only.begin(), only.end(), c.name) != only.end();
                if (!wanted) {
                    continue;
                }
                CheckResult r;
                {
                    py::gil_scoped_release release;
                    r = c.run();
                }
                out.append(py::dict(py::arg("name") = c.name, py::arg("passed") = r.passed,
                                    py::arg("detail") = r.detail, py::arg("seconds") = r.seconds));
            }
            return out;
        },
        py::arg("level") = "quick", py::arg("only") = std::vector<std::string>{});
}
