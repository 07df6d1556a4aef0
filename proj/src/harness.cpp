#include "p2l/harness.hpp"

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "p2l/baselines.hpp"
#include "p2l/bounds.hpp"
#include "p2l/parallel.hpp"

namespace p2l::harness {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.3.0";

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.contains(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->template get<T>();
}

reach::State2 read_pair(const json& j, const std::string& what) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw std::invalid_argument(what + ": expected two numbers");
  return {v[0], v[1]};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string{}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<RunRecord> failed_rows(std::size_t rep, std::size_t n,
                                   const std::vector<std::string>& methods,
                                   const std::string& error) {
  std::vector<RunRecord> rows;
  for (const auto& m : methods) {
    RunRecord r;
    r.rep = rep;
    r.method = m;
    r.n = n;
    r.failed = true;
    r.error = error;
    rows.push_back(r);
  }
  return rows;
}

struct RepOutput {
  std::vector<RunRecord> records;
  std::vector<LevelRow> levels;
};

RepOutput run_reach_rep(const ReachConfig& cfg, std::uint64_t seed, std::size_t rep) {
  const auto t0 = std::chrono::steady_clock::now();
  RepOutput out;
  const auto data = reach::generate_terminal_states(cfg.duffing, cfg.init, cfg.n,
                                                    derive_seed(seed, 1), 1);
  const Dataset<reach::Point> dataset(data, cfg.n_init);
  const auto p2l_run = reach::reach_p2l(dataset, cfg.degree, cfg.delta, cfg.ridge);

  const reach::Box box = cfg.volume_box ? *cfg.volume_box
                                        : reach::Box::around(data, cfg.volume_margin);
  const std::uint64_t volume_seed = derive_seed(seed, 3);
  const auto mc_states = reach::to_matrix(reach::generate_terminal_states(
      cfg.duffing, cfg.init, cfg.mc_samples, derive_seed(seed, 2), 1));

  const auto vol = reach::volume_mc(p2l_run.model, box, cfg.volume_samples, volume_seed, 1);
  const auto risk = reach::violation_fraction(p2l_run.model, mc_states, 1);
  RunRecord p2l;
  p2l.rep = rep;
  p2l.method = "P2L";
  p2l.n = cfg.n;
  p2l.eps = p2l_run.eps;
  p2l.risk_mc = risk.value;
  p2l.risk_se = risk.std_error;
  p2l.risk_samples = risk.samples;
  p2l.volume = vol.value;
  p2l.volume_se = vol.std_error;
  p2l.t_size = p2l_run.compression.train_list.size();
  p2l.wall_seconds = seconds_since(t0);
  out.records.push_back(p2l);
  if (!cfg.baselines) return out;

  baselines::SplitPlan plan;
  plan.fractions = cfg.fractions;
  plan.delta_per_fraction = cfg.delta;
  plan.seed = derive_seed(seed, 4);
  plan.ridge = cfg.ridge;
  const baselines::VolumeSpec vspec{box, cfg.volume_samples, volume_seed};

  auto add_baseline = [&](const std::string& method, auto&& sweep_fn) {
    const auto t_start = std::chrono::steady_clock::now();
    try {
      const baselines::SweepResult sweep = sweep_fn();
      const auto r = reach::violation_fraction(*sweep.model, mc_states, 1);
      const auto v = reach::volume_mc(*sweep.model, box, cfg.volume_samples, volume_seed, 1);
      RunRecord rec;
      rec.rep = rep;
      rec.method = method;
      rec.n = cfg.n;
      rec.eps = sweep.eps;
      rec.risk_mc = r.value;
      rec.risk_se = r.std_error;
      rec.risk_samples = r.samples;
      rec.volume = v.value;
      rec.volume_se = v.std_error;
      for (const auto& c : sweep.candidates)
        if (c.fraction == sweep.fraction) rec.t_size = c.fit_indices.size();
      rec.fraction = sweep.fraction;
      rec.wall_seconds = seconds_since(t_start);
      out.records.push_back(rec);
    } catch (const std::exception& e) {
      auto rows = failed_rows(rep, cfg.n, {method}, e.what());
      out.records.push_back(rows.front());
    }
  };
  add_baseline("Conf", [&] {
    return baselines::conformal_reach(data, plan, cfg.degree, p2l_run.eps, vspec, 1);
  });
  add_baseline("TS", [&] {
    return baselines::testset_reach(data, plan, cfg.degree, p2l_run.eps, vspec, 1);
  });
  return out;
}

RepOutput run_oc_rep(const OcConfig& cfg, bool cdf, std::uint64_t seed, std::size_t rep) {
  const auto t0 = std::chrono::steady_clock::now();
  RepOutput out;
  const Dataset<oc::Scenario> data(oc::sample_scenarios(cfg.bench, cfg.n, derive_seed(seed, 1)),
                                   cfg.n_init);
  const std::uint64_t mc_seed = derive_seed(seed, 2);

  std::optional<oc::CdfCertificate> cert;
  if (cdf) cert = oc::certify_cdf(data, cfg.bench, cfg.grid, cfg.levels, cfg.delta, 1);
  const oc::OcResult run = (cert && cfg.levels.back() == cfg.j_bar)
                               ? cert->run
                               : oc::oc_p2l(data, cfg.bench, cfg.grid, cfg.j_bar, cfg.delta, 1);

  RunRecord rec;
  rec.rep = rep;
  rec.method = "P2L";
  rec.n = cfg.n;
  rec.eps = run.eps;
  rec.risk_mc = oc::estimate_cost_risk(run.policy, cfg.bench, cfg.j_bar, cfg.mc_samples, mc_seed, 1);
  rec.risk_samples = cfg.mc_samples;
  rec.risk_se = std::sqrt(rec.risk_mc * (1.0 - rec.risk_mc) / static_cast<double>(cfg.mc_samples));
  rec.t_size = run.compression.train_list.size();
  rec.theta1 = run.policy.theta1;
  rec.theta2 = run.policy.theta2;

  if (cert) {
    const auto tail = oc::estimate_cost_tail(cert->run.policy, cfg.bench, cfg.levels,
                                             cfg.mc_samples, mc_seed, 1);
    for (std::size_t i = 0; i < cert->levels.size(); ++i)
      out.levels.push_back(
          {rep, cfg.n, cert->levels[i].gamma, cert->levels[i].k, cert->levels[i].eps, tail[i]});
  }
  rec.wall_seconds = seconds_since(t0);
  out.records.push_back(rec);
  return out;
}

}  // namespace

std::string version() { return kVersion; }

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::BoundTable: return "bound-table";
    case Experiment::Reach: return "reach";
    case Experiment::Oc: return "oc";
    case Experiment::OcCdf: return "oc-cdf";
  }
  return "unknown";
}

Experiment experiment_from_string(const std::string& s) {
  if (s == "bound-table") return Experiment::BoundTable;
  if (s == "reach") return Experiment::Reach;
  if (s == "oc") return Experiment::Oc;
  if (s == "oc-cdf") return Experiment::OcCdf;
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

void ExperimentConfig::validate() const {
  if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
  switch (experiment) {
    case Experiment::BoundTable:
      for (double d : bound_table.deltas) bounds::BoundQuery{0, 1, d}.validate();
      for (std::size_t n : bound_table.ns)
        if (n < 1) throw std::invalid_argument("config: bound_table N must be >= 1");
      if (bound_table.k_step < 1) throw std::invalid_argument("config: k_step must be >= 1");
      break;
    case Experiment::Reach:
      if (reach.n_init < 1 || reach.n_init >= reach.n)
        throw std::invalid_argument("config: reach needs 1 <= N_i < N");
      bounds::BoundQuery{0, 1, reach.delta}.validate();
      reach.duffing.validate();
      if (reach.mc_samples < 1 || reach.volume_samples < 1)
        throw std::invalid_argument("config: sample counts must be >= 1");
      break;
    case Experiment::Oc:
    case Experiment::OcCdf:
      if (oc.n_init < 1 || oc.n_init >= oc.n)
        throw std::invalid_argument("config: oc needs 1 <= N_i < N");
      bounds::BoundQuery{0, 1, oc.delta}.validate();
      oc.bench.validate();
      if (oc.mc_samples < 1) throw std::invalid_argument("config: mc_samples must be >= 1");
      break;
  }
}

ExperimentConfig default_config(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::BoundTable: c.reps = 1; break;
    case Experiment::Reach: c.reps = 20; break;
    case Experiment::Oc:
    case Experiment::OcCdf: c.reps = 100; break;
  }
  return c;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  reject_unknown(j, {"experiment", "seed", "reps", "output_dir", "bound_table", "reach", "oc"},
                 "config");
  if (j.contains("experiment")) c.experiment = experiment_from_string(j["experiment"]);
  read(j, "seed", c.seed);
  read(j, "reps", c.reps);
  if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();

  if (j.contains("bound_table")) {
    const auto& b = j["bound_table"];
    reject_unknown(b, {"N", "deltas", "k_step"}, "bound_table");
    read(b, "N", c.bound_table.ns);
    read(b, "deltas", c.bound_table.deltas);
    read(b, "k_step", c.bound_table.k_step);
  }
  if (j.contains("reach")) {
    const auto& r = j["reach"];
    reject_unknown(r,
                   {"N", "N_i", "d", "delta", "ridge", "duffing", "init_distribution", "volume_box",
                    "volume_margin", "volume_samples", "mc_samples", "baseline_fractions",
                    "baselines"},
                   "reach");
    auto& rc = c.reach;
    read(r, "N", rc.n);
    read(r, "N_i", rc.n_init);
    read(r, "d", rc.degree);
    read(r, "delta", rc.delta);
    read(r, "ridge", rc.ridge);
    read(r, "volume_margin", rc.volume_margin);
    read(r, "volume_samples", rc.volume_samples);
    read(r, "mc_samples", rc.mc_samples);
    read(r, "baseline_fractions", rc.fractions);
    read(r, "baselines", rc.baselines);
    if (r.contains("duffing")) {
      const auto& d = r["duffing"];
      reject_unknown(d, {"alpha", "gamma", "omega", "t0", "t1", "dt"}, "duffing");
      read(d, "alpha", rc.duffing.alpha_damping);
      read(d, "gamma", rc.duffing.gamma_forcing);
      read(d, "omega", rc.duffing.omega);
      read(d, "t0", rc.duffing.t0);
      read(d, "t1", rc.duffing.t1);
      read(d, "dt", rc.duffing.dt);
    }
    if (r.contains("init_distribution")) {
      const auto& d = r["init_distribution"];
      const std::string type = d.value("type", "uniform_box");
      if (type == "uniform_box") {
        reject_unknown(d, {"type", "lo", "hi"}, "init_distribution");
        rc.init.kind = reach::InitDistribution::Kind::UniformBox;
        if (d.contains("lo")) rc.init.a = read_pair(d["lo"], "init_distribution.lo");
        if (d.contains("hi")) rc.init.b = read_pair(d["hi"], "init_distribution.hi");
      } else if (type == "gaussian") {
        reject_unknown(d, {"type", "mean", "std"}, "init_distribution");
        rc.init.kind = reach::InitDistribution::Kind::Gaussian;
        if (d.contains("mean")) rc.init.a = read_pair(d["mean"], "init_distribution.mean");
        if (d.contains("std")) rc.init.b = read_pair(d["std"], "init_distribution.std");
      } else {
        throw std::invalid_argument("init_distribution: unknown type '" + type + "'");
      }
    }
    if (r.contains("volume_box")) {
      const auto& vb = r["volume_box"];
      if (vb.is_string()) {
        if (vb.get<std::string>() != "auto")
          throw std::invalid_argument("volume_box: expected \"auto\" or {lo, hi}");
        rc.volume_box.reset();
      } else {
        reject_unknown(vb, {"lo", "hi"}, "volume_box");
        rc.volume_box = reach::Box{vb.at("lo").get<std::vector<double>>(),
                                   vb.at("hi").get<std::vector<double>>()};
      }
    }
  }
  if (j.contains("oc")) {
    const auto& o = j["oc"];
    reject_unknown(o,
                   {"N", "N_i", "delta", "J_bar", "mc_samples", "noise_param", "benchmark", "grid",
                    "levels"},
                   "oc");
    auto& oc = c.oc;
    read(o, "N", oc.n);
    read(o, "N_i", oc.n_init);
    read(o, "delta", oc.delta);
    read(o, "J_bar", oc.j_bar);
    read(o, "mc_samples", oc.mc_samples);
    read(o, "levels", oc.levels);
    if (o.contains("noise_param")) {
      const auto np = o["noise_param"].get<std::string>();
      if (np == "variance")
        oc.bench.noise_param = oc::NoiseParam::Variance;
      else if (np == "stddev")
        oc.bench.noise_param = oc::NoiseParam::StdDev;
      else
        throw std::invalid_argument("noise_param: expected variance or stddev");
    }
    if (o.contains("benchmark")) {
      const auto& b = o["benchmark"];
      reject_unknown(b, {"a", "b", "H", "q", "r", "x0_mean", "x0_spread", "w_mean", "w_spread"},
                     "benchmark");
      read(b, "a", oc.bench.a);
      read(b, "b", oc.bench.b);
      read(b, "H", oc.bench.horizon);
      read(b, "q", oc.bench.q);
      read(b, "r", oc.bench.r);
      read(b, "x0_mean", oc.bench.x0_mean);
      read(b, "x0_spread", oc.bench.x0_spread);
      read(b, "w_mean", oc.bench.w_mean);
      read(b, "w_spread", oc.bench.w_spread);
    }
    if (o.contains("grid")) {
      const auto& g = o["grid"];
      reject_unknown(g, {"theta1", "theta2", "points_per_axis"}, "grid");
      if (g.contains("theta1")) {
        const auto t = read_pair(g["theta1"], "grid.theta1");
        oc.grid.theta1_lo = t[0];
        oc.grid.theta1_hi = t[1];
      }
      if (g.contains("theta2")) {
        const auto t = read_pair(g["theta2"], "grid.theta2");
        oc.grid.theta2_lo = t[0];
        oc.grid.theta2_hi = t[1];
      }
      read(g, "points_per_axis", oc.grid.points_per_axis);
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file, ExperimentConfig base) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config file " + file.string());
  return config_from_json(json::parse(in, nullptr, true, true), std::move(base));
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed;
  j["reps"] = c.reps;
  j["output_dir"] = c.output_dir.string();
  j["bound_table"] = {{"N", c.bound_table.ns},
                      {"deltas", c.bound_table.deltas},
                      {"k_step", c.bound_table.k_step}};
  const auto& r = c.reach;
  json init;
  if (r.init.kind == reach::InitDistribution::Kind::UniformBox)
    init = {{"type", "uniform_box"}, {"lo", r.init.a}, {"hi", r.init.b}};
  else
    init = {{"type", "gaussian"}, {"mean", r.init.a}, {"std", r.init.b}};
  j["reach"] = {{"N", r.n},
                {"N_i", r.n_init},
                {"d", r.degree},
                {"delta", r.delta},
                {"ridge", r.ridge},
                {"duffing",
                 {{"alpha", r.duffing.alpha_damping},
                  {"gamma", r.duffing.gamma_forcing},
                  {"omega", r.duffing.omega},
                  {"t0", r.duffing.t0},
                  {"t1", r.duffing.t1},
                  {"dt", r.duffing.dt}}},
                {"init_distribution", init},
                {"volume_margin", r.volume_margin},
                {"volume_samples", r.volume_samples},
                {"mc_samples", r.mc_samples},
                {"baseline_fractions", r.fractions},
                {"baselines", r.baselines}};
  if (r.volume_box)
    j["reach"]["volume_box"] = {{"lo", r.volume_box->lo}, {"hi", r.volume_box->hi}};
  else
    j["reach"]["volume_box"] = "auto";
  const auto& o = c.oc;
  j["oc"] = {{"N", o.n},
             {"N_i", o.n_init},
             {"delta", o.delta},
             {"J_bar", o.j_bar},
             {"mc_samples", o.mc_samples},
             {"noise_param",
              o.bench.noise_param == oc::NoiseParam::Variance ? "variance" : "stddev"},
             {"benchmark",
              {{"a", o.bench.a},
               {"b", o.bench.b},
               {"H", o.bench.horizon},
               {"q", o.bench.q},
               {"r", o.bench.r},
               {"x0_mean", o.bench.x0_mean},
               {"x0_spread", o.bench.x0_spread},
               {"w_mean", o.bench.w_mean},
               {"w_spread", o.bench.w_spread}}},
             {"grid",
              {{"theta1", {o.grid.theta1_lo, o.grid.theta1_hi}},
               {"theta2", {o.grid.theta2_lo, o.grid.theta2_hi}},
               {"points_per_axis", o.grid.points_per_axis}}},
             {"levels", o.levels}};
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t workers) {
  config.validate();
  if (workers == 0) workers = default_workers();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult res;
  res.config = config;
  res.workers = workers;

  if (config.experiment == Experiment::BoundTable) {
    for (std::size_t n : config.bound_table.ns)
      for (double delta : config.bound_table.deltas)
        for (std::size_t k = 0; k <= n; k += config.bound_table.k_step) {
          res.bounds.push_back({k, n, delta, bounds::eps_bar({k, n, delta}).eps});
          if (k != n && k + config.bound_table.k_step > n)
            res.bounds.push_back({n, n, delta, 1.0});
        }
    res.wall_seconds = seconds_since(t0);
    return res;
  }

  std::vector<RepOutput> per_rep(config.reps);
  parallel_for(
      config.reps,
      [&](std::size_t rep) {
        const std::uint64_t seed = derive_seed(config.seed, rep);
        try {
          switch (config.experiment) {
            case Experiment::Reach: per_rep[rep] = run_reach_rep(config.reach, seed, rep); break;
            case Experiment::Oc: per_rep[rep] = run_oc_rep(config.oc, false, seed, rep); break;
            case Experiment::OcCdf: per_rep[rep] = run_oc_rep(config.oc, true, seed, rep); break;
            case Experiment::BoundTable: break;
          }
        } catch (const std::exception& e) {
          const bool reach = config.experiment == Experiment::Reach;
          const std::vector<std::string> methods =
              reach && config.reach.baselines ? std::vector<std::string>{"P2L", "Conf", "TS"}
                                              : std::vector<std::string>{"P2L"};
          per_rep[rep].records =
              failed_rows(rep, reach ? config.reach.n : config.oc.n, methods, e.what());
          per_rep[rep].levels.clear();
        }
      },
      workers);
  for (auto& r : per_rep) {
    res.records.insert(res.records.end(), r.records.begin(), r.records.end());
    res.levels.insert(res.levels.end(), r.levels.begin(), r.levels.end());
  }
  res.wall_seconds = seconds_since(t0);
  return res;
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.n = values.size();
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(a.n);
  if (a.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(a.n - 1));
  }
  return a;
}

std::map<std::string, MethodSummary> summarize(const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  std::map<std::string, std::map<std::string, std::vector<double>>> columns;
  std::map<std::string, MethodSummary> out;
  for (const auto& r : records) {
    auto& s = out[r.method];
    if (r.failed) {
      ++s.failed;
      continue;
    }
    ++s.ok;
    auto& col = columns[r.method];
    col["eps"].push_back(r.eps);
    col["risk_mc"].push_back(r.risk_mc);
    col["t_size"].push_back(static_cast<double>(r.t_size));
    if (r.volume) col["volume"].push_back(*r.volume);
  }
  for (auto& [method, cols] : columns)
    for (auto& [metric, values] : cols) out[method].metrics[metric] = aggregate(values);
  return out;
}

std::string bound_table_csv(const std::vector<BoundRow>& rows) {
  std::ostringstream os;
  os << "k,N,delta,eps\n";
  for (const auto& r : rows) os << r.k << ',' << r.n << ',' << fmt(r.delta) << ',' << fmt(r.eps) << '\n';
  return os.str();
}

std::string reach_reps_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << "rep,method,volume,volume_se,eps_bound,risk_mc,risk_se,T_size\n";
  for (const auto& r : records) {
    if (r.failed) {
      os << r.rep << ',' << r.method << ",,,,,,\n";
      continue;
    }
    os << r.rep << ',' << r.method << ',' << fmt(r.volume) << ',' << fmt(r.volume_se) << ','
       << fmt(r.eps) << ',' << fmt(r.risk_mc) << ',' << fmt(r.risk_se) << ',' << r.t_size << '\n';
  }
  return os.str();
}

std::string oc_reps_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << "rep,N,theta1,theta2,T_size,eps_bound,risk_mc\n";
  for (const auto& r : records) {
    if (r.failed) {
      os << r.rep << ',' << r.n << ",,,,,\n";
      continue;
    }
    os << r.rep << ',' << r.n << ',' << fmt(r.theta1) << ',' << fmt(r.theta2) << ',' << r.t_size
       << ',' << fmt(r.eps) << ',' << fmt(r.risk_mc) << '\n';
  }
  return os.str();
}

std::string levels_csv(const std::vector<LevelRow>& rows) {
  std::ostringstream os;
  os << "rep,N,gamma,k,eps,tail_mc\n";
  for (const auto& r : rows)
    os << r.rep << ',' << r.n << ',' << fmt(r.gamma) << ',' << r.k << ',' << fmt(r.eps) << ','
       << fmt(r.tail_mc) << '\n';
  return os.str();
}

std::string summary_csv(const std::map<std::string, MethodSummary>& s) {
  std::ostringstream os;
  os << "method,metric,mean,std,n,failed\n";
  for (const auto& [method, ms] : s)
    for (const auto& [metric, a] : ms.metrics)
      os << method << ',' << metric << ',' << fmt(a.mean) << ',' << fmt(a.std) << ',' << a.n << ','
         << ms.failed << '\n';
  return os.str();
}

std::string reach_table_csv(const std::map<std::string, MethodSummary>& s) {
  const std::vector<std::string> methods{"P2L", "Conf", "TS"};
  auto cell = [&](const std::string& method, const std::string& metric) -> std::string {
    const auto it = s.find(method);
    if (it == s.end()) return "";
    const auto m = it->second.metrics.find(metric);
    if (m == it->second.metrics.end()) return "";
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.3f ± %.3f", m->second.mean, m->second.std);
    return buf;
  };
  std::ostringstream os;
  os << "metric,P2L,Conf,TS\n";
  for (const auto& [label, metric] :
       std::vector<std::pair<std::string, std::string>>{{"Volume", "volume"}, {"Risk", "risk_mc"}}) {
    os << label;
    for (const auto& m : methods) os << ',' << cell(m, metric);
    os << '\n';
  }
  return os.str();
}

json summary_json(const ExperimentResult& r) {
  json j;
  j["config"] = config_to_json(r.config);
  j["versions"] = {{"p2l", version()},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR)},
                   {"compiler", __VERSION__}};
  j["wall_clock_seconds"] = r.wall_seconds;
  j["workers"] = r.workers;
  if (!r.records.empty()) {
    json methods = json::object();
    for (const auto& [method, ms] : summarize(r.records)) {
      json m;
      m["ok"] = ms.ok;
      m["failed"] = ms.failed;
      for (const auto& [metric, a] : ms.metrics)
        m[metric] = {{"mean", a.mean}, {"std", a.std}, {"n", a.n}};
      methods[method] = m;
    }
    j["methods"] = methods;
  }
  json failures = json::array();
  for (const auto& rec : r.records)
    if (rec.failed) failures.push_back({{"rep", rec.rep}, {"method", rec.method}, {"error", rec.error}});
  j["failures"] = failures;
  const bool reach_run = r.config.experiment == Experiment::Reach;
  const bool oc_run = r.config.experiment == Experiment::Oc || r.config.experiment == Experiment::OcCdf;
  if (reach_run) {
    j["confidence"] = {{"per_candidate_delta", r.config.reach.delta},
                       {"baseline_union_confidence",
                        1.0 - static_cast<double>(r.config.reach.fractions.size()) * r.config.reach.delta},
                       {"p2l_confidence", 1.0 - r.config.reach.delta}};
  } else if (oc_run) {
    j["confidence"] = {{"delta", r.config.oc.delta}};
    if (r.config.experiment == Experiment::OcCdf)
      j["confidence"]["joint_levels_confidence"] =
          1.0 - static_cast<double>(r.config.oc.levels.size()) * r.config.oc.delta;
  }
  return j;
}

std::filesystem::path write_outputs(const ExperimentResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(r.config.output_dir);
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
  const std::string base = to_string(r.config.experiment) + "-" + stamp;
  fs::path dir = r.config.output_dir / base;
  for (int n = 1; fs::exists(dir); ++n) dir = r.config.output_dir / (base + "-" + std::to_string(n));
  fs::create_directory(dir);

  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    out << body;
    if (!out) throw std::runtime_error("failed to write " + (dir / name).string());
  };
  switch (r.config.experiment) {
    case Experiment::BoundTable: write("bounds.csv", bound_table_csv(r.bounds)); break;
    case Experiment::Reach:
      write("reps.csv", reach_reps_csv(r.records));
      write("table.csv", reach_table_csv(summarize(r.records)));
      break;
    case Experiment::Oc:
    case Experiment::OcCdf:
      write("reps.csv", oc_reps_csv(r.records));
      if (r.config.experiment == Experiment::OcCdf) write("levels.csv", levels_csv(r.levels));
      break;
  }
  if (!r.records.empty()) write("summary.csv", summary_csv(summarize(r.records)));
  write("summary.json", summary_json(r).dump(2) + "\n");
  return dir;
}

}  // namespace p2l::harness
