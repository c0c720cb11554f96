#include <fstream>
#include <sstream>

#include <doctest.h>

#include "minedispatch/experiments.hpp"
#include "support.hpp"

using namespace dispatch;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("dispatch_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

SweepSpec tiny_sweep() {
  SweepSpec s;
  s.reward_duration = hours(0.5);
  s.horizon_factors = {1.0, 2.0};
  s.halftime_factors = {0.5, 1.0, 1.5};
  s.replications = 2;
  s.duration = hours(1.5);
  s.iterations = 20;
  return s;
}

KpiRecord with_score(double score) {
  KpiRecord k;
  k.score = score;
  return k;
}

}  // namespace

TEST_CASE("compute_kpis sums activity durations by type") {
  auto doc = support::small_mine(1);
  doc["trucks"][0]["start"] = "L";
  const auto config = support::build(doc);
  SimState state(config, {{}, true, nullptr});
  apply_decision(state, 0, Action::haul(0));
  CHECK_FALSE(advance_to_decision(state, 1500.0));
  state.close_trace(1500.0);
  const auto k = compute_kpis({}, state, 1500.0);
  CHECK(k.operational == doctest::Approx(1500.0));
  CHECK(k.queuing == 0.0);
  CHECK(k.fleet_time == 1500.0);
  CHECK(k.accounted() == doctest::Approx(k.fleet_time));
  CHECK(k.material == 0.0);
}

TEST_CASE("a run meeting every target scores non-negative") {
  auto doc = support::small_mine(1);
  doc["tasks"][0]["rate"] = 10;
  doc["tasks"][1]["rate"] = 10;
  const auto config = support::build(doc);
  SimState state(config, {{}, true, nullptr});
  TaskIndex next = 0;
  while (auto dp = advance_to_decision(state, hours(4.0))) {
    apply_decision(state, dp->truck, Action::haul(next));
    next = static_cast<TaskIndex>(1 - next);
  }
  state.close_trace(hours(4.0));
  for (const auto& task : config.tasks) {
    REQUIRE(state.flow_log().cumulative(task.source, task.destination, hours(4.0)) >= goal_volume(task, hours(4.0)));
  }
  CHECK(compute_kpis({}, state, hours(4.0)).score >= 0.0);
}

TEST_CASE("make_discount derives horizon and discount from the factors") {
  const auto battery = make_discount(hours(7.0), 1.5, 1.0, 600.0);
  CHECK(battery.horizon == doctest::Approx(hours(10.5)));
  CHECK(battery.factor == doctest::Approx(halftime_to_discount(hours(7.0), 600.0)));
  const auto tyre = make_discount(hours(4.0), 1.0, 0.5, 600.0);
  CHECK(tyre.horizon == doctest::Approx(hours(4.0)));
  CHECK(tyre.factor == doctest::Approx(halftime_to_discount(hours(2.0), 600.0)));
  CHECK(default_reward_duration(ExperimentConstraint::battery) == hours(7.0));
  CHECK(default_reward_duration(ExperimentConstraint::tyre) == hours(4.0));
  CHECK(default_reward_duration(ExperimentConstraint::capacity_ratio) == hours(1.0));
  CHECK(default_reward_duration(ExperimentConstraint::none) == hours(1.0));
}

TEST_CASE("sweep validation") {
  SweepSpec ok;
  CHECK_NOTHROW(ok.validate());
  auto bad = ok;
  bad.horizon_factors = {1.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.halftime_factors = {-1.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.replications = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.duration = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.iterations = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.horizon_factors.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  const auto config = support::reference();
  const auto dir = scratch("invalid");
  CHECK_THROWS_AS(run_experiment(config, ExperimentConstraint::none, PlannerKind::fast_con, bad, {dir}), ConfigError);
  CHECK_FALSE(fs::exists(dir / "runs.csv"));
}

TEST_CASE("emit_plot_data") {
  const auto dir = scratch("plot");
  emit_plot_data({}, dir);
  CHECK(lines(dir / "kpi_score.csv") == std::vector<std::string>{"f_hz,f_hf,mean,stddev,n"});
  for (const auto& name : kpi_names()) CHECK(fs::exists(dir / ("kpi_" + name + ".csv")));

  emit_plot_data({{1.0, 1.0, {with_score(7.0)}}}, dir);
  CHECK(lines(dir / "kpi_score.csv") == std::vector<std::string>{"f_hz,f_hf,mean,stddev,n", "1,1,7,0,1"});

  emit_plot_data({{2.0, 1.0, {with_score(10.0), with_score(20.0)}}, {1.0, 0.5, {with_score(1.0)}}}, dir);
  const auto rows = lines(dir / "kpi_score.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1] == "1,0.5,1,0,1");
  CHECK(rows[2].rfind("2,1,15,", 0) == 0);
}

TEST_CASE("mean, stddev and median") {
  const std::vector<double> v{10.0, 20.0};
  const auto [mean, sd] = mean_stddev(v);
  CHECK(mean == 15.0);
  CHECK(sd == doctest::Approx(std::sqrt(50.0)));
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(median({}) == 0.0);
}

TEST_CASE("time above the soft tyre threshold") {
  TyreModel model;
  model.soft_threshold = 80.0;
  model.heating_rate = 20.0;
  model.cooling_rate = 0.5;
  model.ambient = 35.0;
  ActivityRecord transit{0, ActivityType::transit, 0, 0.0, 3600.0, 3600.0, 0.0, false, 0, 0, 70.0, 90.0};
  CHECK(time_above_threshold(transit, model, 80.0) == doctest::Approx(1800.0));
  ActivityRecord cool{0, ActivityType::park, 0, 0.0, hours(10.0), hours(10.0), 0.0, false, 0, 0, 85.0, 35.0};
  const double expected = hours(std::log(50.0 / 45.0) / 0.5);
  CHECK(time_above_threshold(cool, model, 80.0) == doctest::Approx(expected));
}

TEST_CASE("run_experiment covers the sweep grid and is reproducible") {
  const auto config = support::reference();
  const auto sweep = tiny_sweep();
  const auto a = scratch("repro_a");
  const auto b = scratch("repro_b");
  const auto cells = run_experiment(config, ExperimentConstraint::battery, PlannerKind::fast_con, sweep, {a, true, true, 1});
  run_experiment(config, ExperimentConstraint::battery, PlannerKind::fast_con, sweep, {b, true, true, 2});

  CHECK(cells.size() == sweep.horizon_factors.size() * sweep.halftime_factors.size());
  for (const auto& c : cells) CHECK(c.runs.size() == static_cast<std::size_t>(sweep.replications));
  CHECK(lines(a / "kpi_score.csv").size() == 1 + cells.size());
  CHECK(lines(a / "runs.csv").size() == 1 + cells.size() * sweep.replications);

  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename().string();
    if (name == "timing.csv" || name.find("_search.json") != std::string::npos) continue;
    CHECK_MESSAGE(slurp(entry.path()) == slurp(b / name), name);
    ++compared;
  }
  CHECK(compared > cells.size());
}

TEST_CASE("fifteen replications give fifteen rows per cell") {
  const auto config = support::reference();
  SweepSpec sweep;
  sweep.replications = 15;
  sweep.duration = hours(0.5);
  sweep.iterations = 10;
  const auto dir = scratch("fifteen");
  const auto cells = run_experiment(config, ExperimentConstraint::none, PlannerKind::fast_con, sweep, {dir});
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].runs.size() == 15);
  CHECK(lines(dir / "runs.csv").size() == 16);
  CHECK(lines(dir / "kpi_material.csv")[1].substr(lines(dir / "kpi_material.csv")[1].rfind(',') + 1) == "15");
}

TEST_CASE("run_single accounting and baseline tuning") {
  const auto config = support::reference();
  for (auto planner : {PlannerKind::fast_con, PlannerKind::fast_hc}) {
    RunSpec spec = planner == PlannerKind::fast_hc ? baseline_run(ExperimentConstraint::battery, 3, 30, hours(2.0))
                                                   : RunSpec{ExperimentConstraint::battery, planner};
    spec.iterations = 30;
    spec.duration = hours(2.0);
    const auto out = run_single(config, spec);
    CHECK(out.kpis.accounted() == doctest::Approx(out.kpis.fleet_time).epsilon(1e-9));
    CHECK(out.kpis.decisions == static_cast<int>(out.log.size()));
    CHECK(out.kpis.operational >= 0.0);
    CHECK(out.kpis.queuing >= 0.0);
  }
  const auto hc = baseline_run(ExperimentConstraint::tyre, 1, 100);
  const BaselineTuning tuning;
  CHECK(hc.planner == PlannerKind::fast_hc);
  CHECK(hc.reward_duration == tuning.reward_duration);
  CHECK(hc.horizon_factor == tuning.horizon_factor);
  CHECK(hc.halftime_factor == tuning.halftime_factor);

  auto doc = support::reference_doc();
  doc["constraints"] = support::json::array();
  const auto bare = support::build(doc);
  CHECK_THROWS_AS(run_single(bare, {ExperimentConstraint::battery, PlannerKind::fast_con}), ConfigError);
}

TEST_CASE("experiment names") {
  CHECK(parse_experiment_constraint("capacity-ratio") == ExperimentConstraint::capacity_ratio);
  CHECK_FALSE(parse_experiment_constraint("window"));
  CHECK(parse_planner("fast-hc") == PlannerKind::fast_hc);
  CHECK_FALSE(parse_planner("greedy"));
  CHECK(experiment_constraints(ExperimentConstraint::capacity_ratio) ==
        ConstraintSet{ConstraintKind::capacity, ConstraintKind::ratio});
}
