#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "p2l/duffing.hpp"
#include "p2l/opt_control.hpp"
#include "p2l/reachability.hpp"

namespace p2l::harness {

enum class Experiment { BoundTable, Reach, Oc, OcCdf };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

struct BoundTableConfig {
  std::vector<std::size_t> ns{500};
  std::vector<double> deltas{1e-2, 1e-4, 1e-6};
  std::size_t k_step = 1;  // k = 0, k_step, 2 k_step, ..., N
};

struct ReachConfig {
  std::size_t n = 2000;
  std::size_t n_init = 200;
  std::size_t degree = 10;
  double delta = 0.01;
  // Added to the moment matrix in the normalized basis. Degree-10 moments of
  // terminal Duffing states are numerically singular without it.
  double ridge = 1e-10;
  reach::DuffingConfig duffing;
  reach::InitDistribution init;
  std::optional<reach::Box> volume_box;  // unset: data bounding box + margin
  double volume_margin = 0.25;
  std::size_t volume_samples = 100000;
  std::size_t mc_samples = 50000;
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  bool baselines = true;
};

struct OcConfig {
  std::size_t n = 128;
  std::size_t n_init = 1;
  double delta = 0.01;
  double j_bar = 4.0;
  std::size_t mc_samples = 10000;
  oc::LinearBenchmark bench;
  oc::PolicyGrid grid;
  std::vector<double> levels{0.4, 0.8, 1.2, 1.6, 2.0, 2.4, 2.8, 3.2, 3.6, 4.0};
};

struct ExperimentConfig {
  Experiment experiment = Experiment::BoundTable;
  std::uint64_t seed = 0;
  std::size_t reps = 1;
  std::filesystem::path output_dir = "out";
  BoundTableConfig bound_table;
  ReachConfig reach;
  OcConfig oc;

  void validate() const;
};

/// Fields missing from `j` keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& file, ExperimentConfig base = {});
nlohmann::json config_to_json(const ExperimentConfig& c);

/// Desk-scale defaults per experiment (reach: 20 reps / 50k MC draws; oc: 100 reps / 10k).
ExperimentConfig default_config(Experiment e);

struct RunRecord {
  std::size_t rep = 0;
  std::string method;
  double eps = 1.0;
  double risk_mc = 0.0;
  double risk_se = 0.0;
  std::size_t risk_samples = 0;
  std::optional<double> volume;
  std::optional<double> volume_se;
  std::size_t t_size = 0;
  std::optional<double> theta1;
  std::optional<double> theta2;
  std::optional<double> fraction;
  std::size_t n = 0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct LevelRow {
  std::size_t rep = 0;
  std::size_t n = 0;
  double gamma = 0.0;
  std::size_t k = 0;
  double eps = 1.0;
  double tail_mc = 0.0;
};

struct BoundRow {
  std::size_t k = 0;
  std::size_t n = 0;
  double delta = 0.0;
  double eps = 1.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRecord> records;  // ordered by (rep, method order)
  std::vector<LevelRow> levels;
  std::vector<BoundRow> bounds;
  double wall_seconds = 0.0;
  std::size_t workers = 1;
};

/// Rep r runs on seed derive_seed(seed, r), so the records do not depend on
/// worker count or scheduling. A rep that throws becomes a failed row.
ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t workers = 0);

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  std::size_t n = 0;
};

struct MethodSummary {
  std::map<std::string, Aggregate> metrics;  // eps, risk_mc, volume, t_size
  std::size_t ok = 0;
  std::size_t failed = 0;
};

/// Per-method mean and sample std of every metric, failed rows excluded.
std::map<std::string, MethodSummary> summarize(const std::vector<RunRecord>& records);

Aggregate aggregate(const std::vector<double>& values);

/// CSV bodies. Each has a header row and '\n' line endings.
std::string bound_table_csv(const std::vector<BoundRow>& rows);
std::string reach_reps_csv(const std::vector<RunRecord>& records);
std::string oc_reps_csv(const std::vector<RunRecord>& records);
std::string levels_csv(const std::vector<LevelRow>& rows);
std::string summary_csv(const std::map<std::string, MethodSummary>& s);
/// Volume and risk rows with one "mean ± std" column per method (P2L, Conf, TS).
std::string reach_table_csv(const std::map<std::string, MethodSummary>& s);

nlohmann::json summary_json(const ExperimentResult& r);

/// Writes every output of `r` into a fresh directory under r.config.output_dir
/// (<experiment>-<UTC timestamp>[-n]); earlier runs are never touched. Returns it.
std::filesystem::path write_outputs(const ExperimentResult& r);

std::string version();

}  // namespace p2l::harness
