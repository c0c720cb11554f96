// Command-line front end: validate scenarios and run dispatch experiments.

#include <iostream>

#include <CLI11.hpp>

#include "minedispatch/experiments.hpp"
#include "minedispatch/scenario_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

dispatch::MineConfig load_valid(const std::string& path) {
  auto config = dispatch::load_scenario(path);
  const auto report = dispatch::validate_scenario(config);
  if (!report.ok()) {
    std::string msg = "scenario failed validation:";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw dispatch::ConfigError(msg);
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint-aware haul-truck dispatch experiments"};
  app.require_subcommand(1);

  std::string scenario;
  std::string constraint_name = "none";
  std::string planner_name = "fast-con";
  std::vector<double> fhz;
  std::vector<double> fhf;
  double reward_hours = 0.0;
  int iterations = 10000;
  int replications = 15;
  double duration = dispatch::hours(24.0);
  double dt = 600.0;
  std::uint64_t seed = 1;
  int capacity_min = -1;
  std::string out_dir = "results";
  bool trace = false;
  bool search_stats = false;

  auto* run = app.add_subcommand("run", "Run a sweep of receding-horizon simulations");
  run->add_option("--scenario", scenario, "Scenario JSON file")->required();
  run->add_option("--constraint", constraint_name, "none | battery | tyre | capacity-ratio | window");
  run->add_option("--planner", planner_name, "fast-con | fast-hc");
  run->add_option("--fhz", fhz, "Horizon factors (comma separated)")->delimiter(',');
  run->add_option("--fhf", fhf, "Halftime factors (comma separated)")->delimiter(',');
  run->add_option("--dr", reward_hours, "Reward observation duration d_r in hours (default per constraint)");
  run->add_option("--iterations", iterations, "Search iterations per decision");
  run->add_option("--replications", replications, "Seeded replications per cell");
  run->add_option("--duration", duration, "Simulated seconds per run");
  run->add_option("--dt", dt, "Reward discretisation step in seconds");
  run->add_option("--seed", seed, "Base seed; replication r uses seed + r");
  run->add_option("--capacity-min", capacity_min, "Heuristic minimum crusher trucks (fast-hc)");
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--trace", trace, "Write per-run activity traces");
  run->add_flag("--search-stats", search_stats, "Write per-decision search statistics");

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario");
  validate->add_option("--scenario", scenario, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (validate->parsed()) {
      load_valid(scenario);
      std::cout << "ok\n";
      return kExitOk;
    }

    if (constraint_name == "window") {
      throw dispatch::ConfigError("unimplemented: no model specified in source for 'window'");
    }
    const auto constraint = dispatch::parse_experiment_constraint(constraint_name);
    if (!constraint) throw dispatch::ConfigError("unknown constraint '" + constraint_name + "'");
    const auto planner = dispatch::parse_planner(planner_name);
    if (!planner) throw dispatch::ConfigError("unknown planner '" + planner_name + "'");

    const auto config = load_valid(scenario);

    dispatch::SweepSpec sweep;
    const dispatch::BaselineTuning tuning;
    const bool baseline = *planner == dispatch::PlannerKind::fast_hc;
    sweep.reward_duration = reward_hours > 0.0 ? dispatch::hours(reward_hours)
                            : baseline         ? tuning.reward_duration
                                               : dispatch::default_reward_duration(*constraint);
    sweep.horizon_factors = !fhz.empty() ? fhz : std::vector<double>{baseline ? tuning.horizon_factor : 1.0};
    sweep.halftime_factors = !fhf.empty() ? fhf : std::vector<double>{baseline ? tuning.halftime_factor : 1.0};
    sweep.replications = replications;
    sweep.iterations = iterations;
    sweep.duration = duration;
    sweep.step = dt;
    sweep.base_seed = seed;
    sweep.validate();
    if (capacity_min > static_cast<int>(config.trucks.size())) {
      throw dispatch::ConfigError("capacity heuristic minimum exceeds the fleet size");
    }

    dispatch::ExperimentOptions options;
    options.out_dir = out_dir;
    options.write_trace = trace;
    options.write_search_stats = search_stats;
    const auto cells = dispatch::run_experiment(config, *constraint, *planner, sweep, options);

    for (const auto& cell : cells) {
      std::vector<double> score;
      std::vector<double> material;
      for (const auto& k : cell.runs) {
        score.push_back(k.score);
        material.push_back(k.material);
      }
      std::cout << "f_hz=" << cell.horizon_factor << " f_hf=" << cell.halftime_factor
                << " median_score=" << dispatch::median(score) << " median_material=" << dispatch::median(material)
                << '\n';
    }
    return kExitOk;
  } catch (const dispatch::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const dispatch::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
