#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "p2l/bounds.hpp"
#include "p2l/harness.hpp"

using namespace p2l;
using namespace p2l::harness;

namespace {

ExperimentConfig small_oc(Experiment e) {
  auto c = default_config(e);
  c.reps = 6;
  c.seed = 42;
  c.oc.n = 24;
  c.oc.mc_samples = 500;
  c.oc.grid.points_per_axis = 15;
  c.oc.j_bar = 40.0;
  c.oc.levels = {30.0, 35.0, 40.0};
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("summaries") {
  RunRecord a;
  a.method = "X";
  a.eps = 0.25;
  auto one = summarize({a});
  CHECK(one["X"].metrics["eps"].mean == 0.25);
  CHECK(one["X"].metrics["eps"].std == 0.0);

  RunRecord b = a, c = a, f = a;
  b.risk_mc = 0.0;
  c.risk_mc = 1.0;
  f.failed = true;
  f.risk_mc = 100.0;
  auto two = summarize({b, c, f});
  CHECK(two["X"].metrics["risk_mc"].mean == 0.5);
  CHECK(two["X"].metrics["risk_mc"].std == doctest::Approx(0.70710678).epsilon(1e-7));
  CHECK(two["X"].ok == 2);
  CHECK(two["X"].failed == 1);
  CHECK_THROWS(summarize({}));
}

TEST_CASE("bound table is a passthrough") {
  auto c = default_config(Experiment::BoundTable);
  c.bound_table.ns = {20};
  c.bound_table.deltas = {0.01, 1e-6};
  c.bound_table.k_step = 3;
  const auto r = run_experiment(c, 1);
  REQUIRE(r.bounds.size() == 2 * 8);
  for (const auto& row : r.bounds) CHECK(row.eps == bounds::eps_bar({row.k, row.n, row.delta}).eps);
  CHECK(r.bounds[6].k == 18);
  CHECK(r.bounds[7].k == 20);
  CHECK(r.bounds[7].eps == 1.0);
  const auto csv = bound_table_csv(r.bounds);
  CHECK(csv.rfind("k,N,delta,eps\n", 0) == 0);
}

TEST_CASE("results do not depend on the worker count") {
  for (auto e : {Experiment::Oc, Experiment::OcCdf}) {
    const auto c = small_oc(e);
    const auto one = run_experiment(c, 1);
    const auto three = run_experiment(c, 3);
    CHECK(oc_reps_csv(one.records) == oc_reps_csv(three.records));
    CHECK(levels_csv(one.levels) == levels_csv(three.levels));
    CHECK(one.records.size() == 6);
  }
}

TEST_CASE("a failing rep becomes failed rows and the sweep continues") {
  auto c = default_config(Experiment::Reach);
  c.reps = 2;
  c.reach.n = 40;
  c.reach.n_init = 5;
  c.reach.degree = 6;
  c.reach.ridge = 0.0;
  c.reach.duffing.t1 = 1.0;
  c.reach.mc_samples = 10;
  c.reach.volume_samples = 10;
  const auto r = run_experiment(c, 1);
  REQUIRE(r.records.size() == 6);
  for (const auto& rec : r.records) {
    CHECK(rec.failed);
    CHECK_FALSE(rec.error.empty());
  }
  CHECK(reach_reps_csv(r.records).find("0,P2L,,,,,,") != std::string::npos);
}

TEST_CASE("small reach run produces every method") {
  auto c = default_config(Experiment::Reach);
  c.reps = 1;
  c.seed = 3;
  c.reach.n = 300;
  c.reach.n_init = 60;
  c.reach.degree = 3;
  c.reach.duffing.t1 = 5.0;
  c.reach.mc_samples = 2000;
  c.reach.volume_samples = 5000;
  c.reach.fractions = {0.3, 0.6};
  const auto r = run_experiment(c, 1);
  REQUIRE(r.records.size() == 3);
  CHECK(r.records[0].method == "P2L");
  CHECK(r.records[1].method == "Conf");
  CHECK(r.records[2].method == "TS");
  for (const auto& rec : r.records) {
    CHECK_FALSE(rec.failed);
    CHECK(rec.eps >= 0.0);
    CHECK(rec.eps <= 1.0);
    CHECK(rec.volume.has_value());
    CHECK(rec.risk_samples == 2000);
  }
  const auto table = reach_table_csv(summarize(r.records));
  CHECK(table.rfind("metric,P2L,Conf,TS\nVolume,", 0) == 0);
  CHECK(table.find("±") != std::string::npos);
}

TEST_CASE("config round trip and strictness") {
  auto c = default_config(Experiment::Reach);
  c.reach.volume_box = reach::Box{{-1, -2}, {3, 4}};
  c.oc.bench.noise_param = oc::NoiseParam::StdDev;
  c.reach.init.kind = reach::InitDistribution::Kind::Gaussian;
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.reach.volume_box->hi == std::vector<double>{3, 4});

  CHECK_THROWS(config_from_json(nlohmann::json::parse(R"({"reach": {"Nn": 5}})")));
  CHECK_THROWS(config_from_json(nlohmann::json::parse(R"({"experiment": "nope"})")));
  const auto partial = config_from_json(nlohmann::json::parse(R"({"oc": {"N": 16}})"));
  CHECK(partial.oc.n == 16);
  CHECK(partial.oc.delta == 0.01);

  auto bad = default_config(Experiment::Oc);
  bad.reps = 0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("outputs go to a fresh directory each time") {
  auto c = small_oc(Experiment::OcCdf);
  c.reps = 2;
  c.output_dir = std::filesystem::temp_directory_path() / "p2l_harness_test";
  std::filesystem::remove_all(c.output_dir);
  const auto r = run_experiment(c, 1);
  const auto d1 = write_outputs(r);
  const auto d2 = write_outputs(r);
  CHECK(d1 != d2);
  for (const char* f : {"reps.csv", "levels.csv", "summary.csv", "summary.json"})
    CHECK(std::filesystem::exists(d1 / f));
  CHECK(slurp(d1 / "reps.csv") == slurp(d2 / "reps.csv"));
  CHECK(slurp(d1 / "reps.csv").rfind("rep,N,theta1,theta2,T_size,eps_bound,risk_mc\n", 0) == 0);
  const auto j = nlohmann::json::parse(slurp(d1 / "summary.json"));
  CHECK(j.contains("config"));
  CHECK(j.contains("versions"));
  CHECK(j.contains("wall_clock_seconds"));
  CHECK(j["methods"]["P2L"]["ok"] == 2);
  std::filesystem::remove_all(c.output_dir);
}
