#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "p2l/bounds.hpp"
#include "p2l/harness.hpp"

namespace h = p2l::harness;

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::string out;
  std::size_t threads = 0;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Base seed");
  cmd->add_option("--reps", f.reps, "Number of repetitions")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--threads", f.threads, "Worker threads (default: P2L_THREADS or all cores)");
}

h::ExperimentConfig resolve(h::Experiment e, const RunFlags& f) {
  h::ExperimentConfig c = h::default_config(e);
  if (!f.config.empty()) {
    c = h::load_config(f.config, c);
    c.experiment = e == h::Experiment::Oc && c.experiment == h::Experiment::OcCdf ? c.experiment : e;
  }
  if (f.seed) c.seed = *f.seed;
  if (f.reps) c.reps = *f.reps;
  if (!f.out.empty()) c.output_dir = f.out;
  return c;
}

int run_and_write(const h::ExperimentConfig& c, std::size_t threads) {
  const auto result = h::run_experiment(c, threads);
  const auto dir = h::write_outputs(result);
  std::size_t failed = 0;
  for (const auto& r : result.records) {
    if (r.failed && failed++ == 0)
      std::cerr << "rep " << r.rep << " " << r.method << " failed: " << r.error << '\n';
  }
  std::cerr << "wrote " << dir.string() << " (" << result.records.size() << " rows, " << failed
            << " failed, " << result.wall_seconds << " s on " << result.workers << " workers)\n";
  if (!result.records.empty()) std::cout << h::summary_csv(h::summarize(result.records));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pick-to-Learn risk certificates and experiments"};
  app.set_version_flag("--version", h::version());
  app.require_subcommand(1);

  // bound
  auto* bound = app.add_subcommand("bound", "Risk bound eps_bar(k, delta, N)");
  std::size_t k = 0, n = 0;
  double delta = 0.0;
  std::string method = "beta";
  bool table = false;
  RunFlags bound_flags;
  bound->add_option("--k", k, "Compression size");
  bound->add_option("--n", n, "Number of samples");
  bound->add_option("--delta", delta, "Confidence parameter");
  bound->add_option("--method", method, "beta (incomplete-beta bisection) or psi (direct root)")
      ->check(CLI::IsMember({"beta", "psi"}));
  bound->add_flag("--table", table, "Emit the configured grid as CSV");
  add_run_flags(bound, bound_flags);

  // reach
  auto* reach = app.add_subcommand("reach", "Duffing reachability with P2L and baselines");
  RunFlags reach_flags;
  add_run_flags(reach, reach_flags);

  // oc
  auto* oc = app.add_subcommand("oc", "Scalar optimal control with a grid policy");
  RunFlags oc_flags;
  std::optional<std::size_t> oc_n;
  std::optional<double> oc_delta;
  std::optional<std::string> noise;
  bool cdf = false;
  oc->add_option("--n", oc_n, "Number of scenarios N");
  oc->add_option("--delta", oc_delta, "Confidence parameter");
  oc->add_option("--noise-param", noise, "Read N(m, s) with s as variance or stddev")
      ->check(CLI::IsMember({"variance", "stddev"}));
  oc->add_flag("--cdf", cdf, "Also certify the cost CDF at the configured levels");
  add_run_flags(oc, oc_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (bound->parsed()) {
      if (table) {
        auto c = resolve(h::Experiment::BoundTable, bound_flags);
        c.reps = 1;
        const auto result = h::run_experiment(c, bound_flags.threads);
        std::cout << h::bound_table_csv(result.bounds);
        if (!bound_flags.out.empty()) std::cerr << "wrote " << h::write_outputs(result).string() << '\n';
        return 0;
      }
      if (bound->count("--n") == 0 || bound->count("--delta") == 0)
        throw CLI::RequiredError("--n and --delta (or --table)");
      const p2l::bounds::BoundQuery q{k, n, delta};
      const auto r = method == "psi" ? p2l::bounds::eps_bar_oracle(q) : p2l::bounds::eps_bar(q);
      std::printf("%.12g\n", r.eps);
      return 0;
    }
    if (reach->parsed()) return run_and_write(resolve(h::Experiment::Reach, reach_flags), reach_flags.threads);
    if (oc->parsed()) {
      auto c = resolve(cdf ? h::Experiment::OcCdf : h::Experiment::Oc, oc_flags);
      if (cdf) c.experiment = h::Experiment::OcCdf;
      if (oc_n) c.oc.n = *oc_n;
      if (oc_delta) c.oc.delta = *oc_delta;
      if (noise)
        c.oc.bench.noise_param =
            *noise == "stddev" ? p2l::oc::NoiseParam::StdDev : p2l::oc::NoiseParam::Variance;
      return run_and_write(c, oc_flags.threads);
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
