#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tcbo/environments.hpp"
#include "tcbo/exact_posterior.hpp"
#include "tcbo/harness.hpp"
#include "tcbo/mdp_io.hpp"
#include "tcbo/nystrom.hpp"
#include "tcbo/objective.hpp"
#include "tcbo/planner.hpp"

namespace py = pybind11;
using namespace tcbo;

namespace {

Kernel make_kernel(const std::string& variant, py::kwargs kwargs) {
    if (variant == "rbf") {
        return Kernel::rbf(kwargs.contains("sigma2") ? kwargs["sigma2"].cast<double>() : 1.0,
                           kwargs.contains("lengthscale") ? kwargs["lengthscale"].cast<double>() : 1.0);
    }
    if (variant == "ode-composite") {
        OdeCompositeParams p;
        if (kwargs.contains("k1")) p.k1 = kwargs["k1"].cast<double>();
        if (kwargs.contains("k2")) p.k2 = kwargs["k2"].cast<double>();
        if (kwargs.contains("k3")) p.k3 = kwargs["k3"].cast<double>();
        if (kwargs.contains("alpha_sig")) p.alpha_sig = kwargs["alpha_sig"].cast<double>();
        if (kwargs.contains("alpha_ode")) p.alpha_ode = kwargs["alpha_ode"].cast<double>();
        if (kwargs.contains("alpha_rbf")) p.alpha_rbf = kwargs["alpha_rbf"].cast<double>();
        const double s2 = kwargs.contains("sigma2") ? kwargs["sigma2"].cast<double>() : 1.0;
        const double ls = kwargs.contains("lengthscale") ? kwargs["lengthscale"].cast<double>() : 1.0;
        return Kernel::ode_composite(p, s2, ls);
    }
    throw std::invalid_argument("unknown kernel variant: " + variant);
}

RunConfig config_from_dict(const py::dict& d) {
    ConfigFile cfg;
    for (auto item : d)
        cfg.set(py::str(item.first).cast<std::string>(), py::str(item.second).cast<std::string>());
    return RunConfig::from_config(cfg);
}

py::dict result_to_dict(const CampaignResult& res) {
    py::dict out;
    out["recommendation_state"] = res.recommendation_state;
    out["recommendation"] = res.recommendation;
    out["final_regret"] = res.final_regret;
    out["identified"] = res.identified;
    out["max_polytope_violation"] = res.max_polytope_violation;
    py::list records;
    for (const StepRecord& r : res.records) {
        py::dict rec;
        rec["t"] = r.t;
        rec["h"] = r.h;
        if (!r.state.empty()) {
            rec["state"] = r.state;
            rec["action"] = r.action;
        } else {
            rec["state"] = r.state_coords;
            rec["action"] = r.action_coords;
        }
        rec["y"] = r.observed ? py::cast(r.y) : py::none();
        rec["z_size"] = r.z_size;
        rec["utility"] = r.utility;
        rec["solve_ms"] = r.solve_ms;
        rec["regret"] = r.regret;
        rec["identified"] = r.identified;
        records.append(rec);
    }
    out["records"] = records;
    return out;
}

}  // namespace

PYBIND11_MODULE(_tcbo, m) {
    m.doc() = "Transition-constrained Bayesian optimization over Markov decision processes";

    py::class_<Kernel>(m, "Kernel")
        .def(py::init(&make_kernel), py::arg("variant"))
        .def("__call__",
             [](const Kernel& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
                 return k(x, y);
             })
        .def("gram", py::overload_cast<const Eigen::MatrixXd&, const Eigen::MatrixXd&>(
                         &Kernel::gram, py::const_))
        .def_property_readonly("name", &Kernel::name);

    m.def("ode_feature", [](double tau, double B, py::kwargs kwargs) {
        OdeCompositeParams p;
        if (kwargs.contains("k1")) p.k1 = kwargs["k1"].cast<double>();
        if (kwargs.contains("k2")) p.k2 = kwargs["k2"].cast<double>();
        if (kwargs.contains("k3")) p.k3 = kwargs["k3"].cast<double>();
        if (kwargs.contains("alpha_sig")) p.alpha_sig = kwargs["alpha_sig"].cast<double>();
        return ode_feature(tau, B, p);
    }, py::arg("tau"), py::arg("B"));

    py::class_<FeatureMap>(m, "FeatureMap")
        .def("__call__", [](const FeatureMap& f, const Eigen::VectorXd& x) { return f(x); })
        .def("eval", &FeatureMap::eval)
        .def_property_readonly("rank", &FeatureMap::rank);

    m.def("build_nystrom", &build_nystrom, py::arg("kernel"), py::arg("landmarks"),
          py::arg("drop_tol") = 1e-10, py::arg("indefinite_tol") = 1e-8);

    py::class_<Surrogate>(m, "Surrogate")
        .def(py::init<FeatureMap>())
        .def("updated",
             [](const Surrogate& s, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const Eigen::VectorXd& noise_var) {
                 std::vector<Observation> obs;
                 for (Eigen::Index i = 0; i < X.rows(); ++i)
                     obs.push_back({X.row(i).transpose(), X.row(i).transpose(), y(i), noise_var(i)});
                 return s.updated(obs);
             },
             py::arg("X"), py::arg("y"), py::arg("noise_var"))
        .def("mean", &Surrogate::mean)
        .def("variance", &Surrogate::variance)
        .def("confidence_bounds", &Surrogate::confidence_bounds, py::arg("x"), py::arg("beta"))
        .def("sample_weights",
             [](const Surrogate& s, std::uint64_t seed) {
                 Rng rng(seed);
                 return s.sample_weights(rng);
             },
             py::arg("seed"))
        .def_property_readonly("rank", &Surrogate::rank);

    m.def("pair_variance_exact", &pair_variance_exact, py::arg("kernel"), py::arg("points"),
          py::arg("weights"), py::arg("sigma2_eff"), py::arg("z"), py::arg("zp"));

    py::class_<FiniteMdp>(m, "FiniteMdp")
        .def_property_readonly("num_states", &FiniteMdp::num_states)
        .def_readonly("horizon", &FiniteMdp::horizon)
        .def_readonly("state_names", &FiniteMdp::state_names)
        .def_readonly("embeddings", &FiniteMdp::embeddings)
        .def_property_readonly("num_pairs", [](const FiniteMdp& m_) { return m_.total_pairs; });

    m.def("load_mdp_file", &load_mdp_file, py::arg("path"));
    m.def("parse_mdp_text", &parse_mdp_text, py::arg("text"));

    m.def("solve_dp",
          [](const FiniteMdp& mdp, const Eigen::VectorXd& reward) {
              const DpResult res = solve_dp(mdp, reward);
              return py::make_tuple(res.policy.pi, res.visitation.d, res.value);
          },
          py::arg("mdp"), py::arg("reward"),
          "Exact finite-horizon DP for a stage-independent reward; returns (policy, visitation, value)");

    m.def("list_benchmarks", [] { return benchmark_registry(); });

    m.def("run_benchmark",
          [](const py::dict& config) {
              const RunConfig cfg = config_from_dict(config);
              const RunOutput out = run_benchmark(cfg);
              py::dict d;
              d["replicates"] = out.replicate_files;
              d["summary"] = out.summary_file;
              return d;
          },
          py::arg("config"),
          "Run replicates per the config dict (keys like 'run.benchmark'); writes JSONL + CSV");

    m.def("run_replicate",
          [](const py::dict& config, std::uint64_t seed) {
              const RunConfig cfg = config_from_dict(config);
              return result_to_dict(run_replicate(cfg, seed));
          },
          py::arg("config"), py::arg("seed") = 0,
          "Run one campaign in memory and return its records and recommendation");
}
