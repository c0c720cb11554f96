#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "minedispatch/baselines.hpp"

namespace dispatch {

enum class ExperimentConstraint : std::uint8_t { none, battery, tyre, capacity_ratio };
enum class PlannerKind : std::uint8_t { fast_con, fast_hc };

std::string_view to_string(ExperimentConstraint c);
std::optional<ExperimentConstraint> parse_experiment_constraint(std::string_view name);
std::string_view to_string(PlannerKind p);
std::optional<PlannerKind> parse_planner(std::string_view name);

/// Constraint families active in the live world for an experiment.
ConstraintSet experiment_constraints(ExperimentConstraint c);

/// Default longest reward-observation duration per experiment.
Seconds default_reward_duration(ExperimentConstraint c);

struct SweepSpec {
  Seconds reward_duration = hours(1.0);  // d_r
  std::vector<double> horizon_factors{1.0};   // f_hz
  std::vector<double> halftime_factors{1.0};  // f_hf
  int replications = 15;
  std::uint64_t base_seed = 1;
  Seconds duration = hours(24.0);
  int iterations = 10000;
  Seconds step = 600.0;  // Delta t

  /// Throws ConfigError for non-positive factors, durations or counts.
  void validate() const;
};

/// FAST tuning used underneath the heuristic baseline: the unconstrained
/// optimum of d_r = 1 h, f_hz = 1.6, f_hf = 1.
struct BaselineTuning {
  Seconds reward_duration = hours(1.0);
  double horizon_factor = 1.6;
  double halftime_factor = 1.0;
};

/// Discount spec for H = f_hz d_r and halftime f_hf d_r.
DiscountSpec make_discount(Seconds reward_duration, double horizon_factor, double halftime_factor, Seconds step);

struct RunSpec {
  ExperimentConstraint constraint = ExperimentConstraint::none;
  PlannerKind planner = PlannerKind::fast_con;
  Seconds reward_duration = hours(1.0);
  double horizon_factor = 1.0;
  double halftime_factor = 1.0;
  std::uint64_t seed = 1;
  int iterations = 10000;
  Seconds duration = hours(24.0);
  Seconds step = 600.0;
  int capacity_min_trucks = -1;  // heuristic baseline only; -1 derives it
};

/// Run spec for the heuristic baseline with its fixed FAST tuning.
RunSpec baseline_run(ExperimentConstraint constraint, std::uint64_t seed, int iterations,
                     Seconds duration = hours(24.0));

struct KpiRecord {
  double score = 0.0;
  double material = 0.0;        // tonnes delivered
  Seconds operational = 0.0;    // load + unload + transit
  Seconds queuing = 0.0;
  Seconds charging = 0.0;
  Seconds parking = 0.0;
  Seconds idle = 0.0;           // disabled or undecided time
  Seconds fleet_time = 0.0;     // trucks x duration
  Seconds hot_tyre = 0.0;       // time with tyre above the soft threshold
  Seconds tyre_delay = 0.0;
  Seconds ratio_delay = 0.0;
  int battery_violations = 0;
  int tyre_violations = 0;
  int capacity_violations = 0;
  int ratio_violations = 0;
  int decisions = 0;
  int forced_decisions = 0;
  double wall_per_decision_ms = 0.0;

  Seconds accounted() const { return operational + queuing + charging + parking + idle; }
};

/// Aggregates the trace of a finished run. `final_state` must have been
/// recorded with tracing on and closed at `duration`.
KpiRecord compute_kpis(const DecisionLog& log, const SimState& final_state, Seconds duration,
                       const ErrorFunctionSpec& err = {});

/// Time with tyre temperature above `threshold` during one activity record,
/// using linear heating in transit and exponential cooling otherwise.
Seconds time_above_threshold(const ActivityRecord& record, const TyreModel& model, double threshold);

struct RunOutcome {
  RunSpec spec;
  KpiRecord kpis;
  DecisionLog log;
  std::vector<ActivityRecord> trace;
};

/// One receding-horizon run on the given scenario.
RunOutcome run_single(const MineConfig& config, const RunSpec& spec);

struct ExperimentOptions {
  std::filesystem::path out_dir;
  bool write_trace = false;
  bool write_search_stats = false;
  int threads = 0;  // 0: DISPATCH_THREADS or hardware concurrency
};

struct CellSummary {
  double horizon_factor = 0.0;
  double halftime_factor = 0.0;
  std::vector<KpiRecord> runs;
};

/// Runs the full sweep and writes runs.csv, timing.csv, one kpi_<name>.csv
/// per indicator and the optional traces and search statistics.
std::vector<CellSummary> run_experiment(const MineConfig& config, ExperimentConstraint constraint,
                                        PlannerKind planner, const SweepSpec& sweep,
                                        const ExperimentOptions& options);

/// Names of the indicators emitted by emit_plot_data, in file order.
const std::vector<std::string>& kpi_names();
double kpi_value(const KpiRecord& k, std::string_view name);

/// Writes kpi_<name>.csv with columns f_hz,f_hf,mean,stddev,n for every
/// indicator. Cells are sorted by (f_hz, f_hf).
void emit_plot_data(const std::vector<CellSummary>& cells, const std::filesystem::path& out_dir);

void write_trace_csv(const std::vector<ActivityRecord>& trace, const MineConfig& config,
                     const std::filesystem::path& path);
void write_search_stats(const DecisionLog& log, const MineConfig& config, const std::filesystem::path& path);

/// Sample mean and standard deviation (n - 1 denominator, 0 for n < 2).
std::pair<double, double> mean_stddev(std::span<const double> values);
double median(std::vector<double> values);

/// Thread count from DISPATCH_THREADS, else hardware concurrency (at least 1).
int configured_threads();

}  // namespace dispatch
