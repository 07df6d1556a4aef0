#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "p2l/bounds.hpp"
#include "p2l/christoffel.hpp"
#include "p2l/core.hpp"
#include "p2l/duffing.hpp"
#include "p2l/harness.hpp"
#include "p2l/opt_control.hpp"
#include "p2l/reachability.hpp"

namespace py = pybind11;
using namespace p2l;

namespace {

std::vector<reach::Point> rows_of(const Eigen::MatrixXd& m) {
  std::vector<reach::Point> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out[i].resize(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  }
  return out;
}

reach::DuffingConfig duffing_config(double alpha, double gamma, double omega, double t0, double t1,
                                    double dt) {
  reach::DuffingConfig c{alpha, gamma, omega, t0, t1, dt};
  c.validate();
  return c;
}

oc::LinearBenchmark benchmark_from(const py::dict& kw) {
  oc::LinearBenchmark b;
  for (auto [key, value] : kw) {
    const auto k = key.cast<std::string>();
    if (k == "a") b.a = value.cast<double>();
    else if (k == "b") b.b = value.cast<double>();
    else if (k == "H") b.horizon = value.cast<std::size_t>();
    else if (k == "q") b.q = value.cast<double>();
    else if (k == "r") b.r = value.cast<double>();
    else if (k == "x0_mean") b.x0_mean = value.cast<double>();
    else if (k == "x0_spread") b.x0_spread = value.cast<double>();
    else if (k == "w_mean") b.w_mean = value.cast<double>();
    else if (k == "w_spread") b.w_spread = value.cast<double>();
    else if (k == "noise_param")
      b.noise_param = value.cast<std::string>() == "stddev" ? oc::NoiseParam::StdDev
                                                             : oc::NoiseParam::Variance;
    else throw py::key_error("unknown benchmark field '" + k + "'");
  }
  b.validate();
  return b;
}

py::dict compression_dict(const std::vector<std::size_t>& t, const std::vector<std::size_t>& u,
                          std::size_t iterations) {
  py::dict d;
  d["T"] = t;
  d["U"] = u;
  d["iterations"] = iterations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pick-to-Learn certificates, meta-algorithms and benchmark experiments";
  m.attr("__version__") = harness::version();

  py::register_exception<reach::SingularMomentMatrix>(m, "SingularMomentMatrix", PyExc_RuntimeError);

  // bounds
  m.def(
      "eps_bar",
      [](std::size_t k, std::size_t n, double delta, const std::string& method) {
        const bounds::BoundQuery q{k, n, delta};
        if (method == "beta") return bounds::eps_bar(q).eps;
        if (method == "psi") return bounds::eps_bar_oracle(q).eps;
        throw py::value_error("method must be 'beta' or 'psi'");
      },
      py::arg("k"), py::arg("n"), py::arg("delta"), py::arg("method") = "beta",
      "Risk bound for compression size k out of n samples at confidence 1 - delta.");
  m.def(
      "psi",
      [](std::size_t k, std::size_t n, double delta, double eps) {
        return bounds::psi_value({k, n, delta}, eps);
      },
      py::arg("k"), py::arg("n"), py::arg("delta"), py::arg("eps"));
  m.def("incomplete_beta", &bounds::incomplete_beta, py::arg("a"), py::arg("b"), py::arg("x"));
  m.def("binomial_tail_inversion", &bounds::binomial_tail_inversion, py::arg("k"), py::arg("n"),
        py::arg("delta"));
  m.def("conformal_eps", &bounds::conformal_eps, py::arg("k"), py::arg("n_cal"), py::arg("delta"));

  // generic P2L over Python objects
  m.def(
      "run_p2l",
      [](std::vector<py::object> data, std::size_t n_init, py::function fit, py::function prop,
         py::function dissatisfaction, py::object init_decision) {
        const Dataset<py::object> ds(std::move(data), n_init);
        Synthesizer<py::object, py::object> synth;
        synth.fit = [fit](std::span<const py::object> train) {
          return fit(py::list(py::cast(std::vector<py::object>(train.begin(), train.end()))));
        };
        const Property<py::object, py::object> phi = [prop](const py::object& h,
                                                             const py::object& z) {
          return prop(h, z).cast<bool>();
        };
        const Dissatisfaction<py::object, py::object> score = [dissatisfaction](
                                                                  const py::object& h,
                                                                  const py::object& z) {
          return dissatisfaction(h, z).cast<double>();
        };
        auto res = run_p2l(ds, synth, phi, score, std::move(init_decision));
        py::dict d = compression_dict(res.train_list, res.violation_list, res.iterations);
        d["decision"] = res.decision;
        return d;
      },
      py::arg("data"), py::arg("n_init"), py::arg("fit"), py::arg("prop"),
      py::arg("dissatisfaction"), py::arg("init_decision"),
      "Basic P2L loop. Returns {'decision', 'T', 'U', 'iterations'} with dataset indices.");

  // reachability
  py::class_<reach::ChristoffelModel>(m, "ChristoffelModel")
      .def("level", [](const reach::ChristoffelModel& mdl,
                       const std::vector<double>& x) { return mdl.level(x); })
      .def("levels", &reach::ChristoffelModel::levels)
      .def("contains", [](const reach::ChristoffelModel& mdl,
                          const std::vector<double>& x) { return mdl.contains(x); })
      .def("with_alpha", &reach::ChristoffelModel::with_alpha)
      .def_property_readonly("alpha", &reach::ChristoffelModel::alpha)
      .def_property_readonly("basis_size",
                             [](const reach::ChristoffelModel& mdl) { return mdl.basis().size(); })
      .def_property_readonly("n_fit", &reach::ChristoffelModel::n_fit);

  m.def(
      "fit_christoffel",
      [](const Eigen::MatrixXd& points, std::size_t degree, double ridge) {
        const auto rows = rows_of(points);
        return reach::fit_christoffel(rows, reach::MonomialBasis(points.cols(), degree), ridge);
      },
      py::arg("points"), py::arg("degree"), py::arg("ridge") = 0.0);
  m.def("basis_size", &reach::basis_size, py::arg("n_x"), py::arg("degree"));

  m.def(
      "duffing_terminal",
      [](std::array<double, 2> x0, double alpha, double gamma, double omega, double t0, double t1,
         double dt) {
        return reach::duffing_terminal(x0, duffing_config(alpha, gamma, omega, t0, t1, dt));
      },
      py::arg("x0"), py::arg("alpha") = 0.05, py::arg("gamma") = 0.4, py::arg("omega") = 1.3,
      py::arg("t0") = 0.0, py::arg("t1") = 100.0, py::arg("dt") = 0.01);

  m.def(
      "terminal_states",
      [](std::size_t n, std::uint64_t seed, std::array<double, 2> lo, std::array<double, 2> hi,
         double t1, double dt) {
        reach::DuffingConfig cfg;
        cfg.t1 = t1;
        cfg.dt = dt;
        reach::InitDistribution init;
        init.a = lo;
        init.b = hi;
        py::gil_scoped_release release;
        return reach::to_matrix(reach::generate_terminal_states(cfg, init, n, seed));
      },
      py::arg("n"), py::arg("seed"), py::arg("lo") = std::array<double, 2>{0.9, 0.9},
      py::arg("hi") = std::array<double, 2>{1.1, 1.1}, py::arg("t1") = 100.0,
      py::arg("dt") = 0.01,
      "Terminal Duffing states (n x 2) from initial states uniform on the box [lo, hi].");

  m.def(
      "reach_p2l",
      [](const Eigen::MatrixXd& points, std::size_t n_init, std::size_t degree, double delta,
         double ridge) {
        const Dataset<reach::Point> ds(rows_of(points), n_init);
        auto res = reach::reach_p2l(ds, degree, delta, ridge);
        py::dict d = compression_dict(res.compression.train_list, res.compression.violation_list,
                                      res.compression.iterations);
        d["eps"] = res.eps;
        d["model"] = res.model;
        return d;
      },
      py::arg("points"), py::arg("n_init"), py::arg("degree"), py::arg("delta"),
      py::arg("ridge") = 0.0);

  // optimal control
  m.def(
      "rollout_cost",
      [](double theta1, double theta2, double x0, std::vector<double> w, const py::kwargs& kw) {
        const auto bench = benchmark_from(kw);
        return oc::rollout_cost(theta1, theta2, oc::Scenario{x0, std::move(w)}, bench);
      },
      py::arg("theta1"), py::arg("theta2"), py::arg("x0"), py::arg("w"));

  m.def(
      "oc_p2l",
      [](std::size_t n, double delta, std::uint64_t seed, double j_bar, std::size_t n_init,
         std::size_t grid_points, const py::kwargs& kw) {
        const auto bench = benchmark_from(kw);
        oc::PolicyGrid grid;
        grid.points_per_axis = grid_points;
        py::gil_scoped_release release;
        const Dataset<oc::Scenario> ds(oc::sample_scenarios(bench, n, seed), n_init);
        auto res = oc::oc_p2l(ds, bench, grid, j_bar, delta);
        py::gil_scoped_acquire acquire;
        py::dict d = compression_dict(res.compression.train_list, res.compression.violation_list,
                                      res.compression.iterations);
        d["eps"] = res.eps;
        d["theta1"] = res.policy.theta1;
        d["theta2"] = res.policy.theta2;
        return d;
      },
      py::arg("n"), py::arg("delta"), py::arg("seed"), py::arg("j_bar") = 4.0,
      py::arg("n_init") = 1, py::arg("grid_points") = 100);

  // harness
  m.def(
      "run_experiment",
      [](const std::string& config_json, std::size_t workers) {
        const auto cfg = harness::config_from_json(nlohmann::json::parse(config_json));
        harness::ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = harness::run_experiment(cfg, workers);
        }
        py::list rows;
        for (const auto& r : res.records) {
          py::dict d;
          d["rep"] = r.rep;
          d["method"] = r.method;
          d["eps"] = r.eps;
          d["risk_mc"] = r.risk_mc;
          d["t_size"] = r.t_size;
          d["volume"] = r.volume ? py::cast(*r.volume) : py::none();
          d["failed"] = r.failed;
          d["error"] = r.error;
          rows.append(d);
        }
        py::dict out;
        out["records"] = rows;
        out["summary"] = harness::summary_json(res).dump();
        if (!res.bounds.empty()) out["bounds_csv"] = harness::bound_table_csv(res.bounds);
        return out;
      },
      py::arg("config_json"), py::arg("workers") = 0,
      "Runs an experiment described by a JSON string; returns records and a JSON summary.");
}
