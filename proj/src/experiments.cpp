#include "minedispatch/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace dispatch {

std::string_view to_string(ExperimentConstraint c) {
  switch (c) {
    case ExperimentConstraint::none: return "none";
    case ExperimentConstraint::battery: return "battery";
    case ExperimentConstraint::tyre: return "tyre";
    case ExperimentConstraint::capacity_ratio: return "capacity-ratio";
  }
  return "?";
}

std::optional<ExperimentConstraint> parse_experiment_constraint(std::string_view name) {
  for (auto c : {ExperimentConstraint::none, ExperimentConstraint::battery, ExperimentConstraint::tyre,
                 ExperimentConstraint::capacity_ratio}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view to_string(PlannerKind p) { return p == PlannerKind::fast_con ? "fast-con" : "fast-hc"; }

std::optional<PlannerKind> parse_planner(std::string_view name) {
  if (name == "fast-con") return PlannerKind::fast_con;
  if (name == "fast-hc") return PlannerKind::fast_hc;
  return std::nullopt;
}

ConstraintSet experiment_constraints(ExperimentConstraint c) {
  switch (c) {
    case ExperimentConstraint::none: return {};
    case ExperimentConstraint::battery: return {ConstraintKind::battery};
    case ExperimentConstraint::tyre: return {ConstraintKind::tyre};
    case ExperimentConstraint::capacity_ratio: return {ConstraintKind::capacity, ConstraintKind::ratio};
  }
  return {};
}

Seconds default_reward_duration(ExperimentConstraint c) {
  switch (c) {
    case ExperimentConstraint::battery: return hours(7.0);
    case ExperimentConstraint::tyre: return hours(4.0);
    default: return hours(1.0);
  }
}

void SweepSpec::validate() const {
  if (!(reward_duration > 0.0)) throw ConfigError("reward duration must be positive");
  if (horizon_factors.empty() || halftime_factors.empty()) throw ConfigError("factor lists must not be empty");
  for (double f : horizon_factors) {
    if (!(f > 0.0)) throw ConfigError("horizon factors must be positive");
  }
  for (double f : halftime_factors) {
    if (!(f > 0.0)) throw ConfigError("halftime factors must be positive");
  }
  if (replications < 1) throw ConfigError("replications must be at least 1");
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (!(duration > 0.0)) throw ConfigError("run duration must be positive");
  if (!(step > 0.0)) throw ConfigError("discretisation step must be positive");
}

DiscountSpec make_discount(Seconds reward_duration, double horizon_factor, double halftime_factor, Seconds step) {
  DiscountSpec d;
  d.step = step;
  d.horizon = horizon_factor * reward_duration;
  d.factor = halftime_to_discount(halftime_factor * reward_duration, step);
  return d;
}

RunSpec baseline_run(ExperimentConstraint constraint, std::uint64_t seed, int iterations, Seconds duration) {
  const BaselineTuning tuning;
  RunSpec spec;
  spec.constraint = constraint;
  spec.planner = PlannerKind::fast_hc;
  spec.reward_duration = tuning.reward_duration;
  spec.horizon_factor = tuning.horizon_factor;
  spec.halftime_factor = tuning.halftime_factor;
  spec.seed = seed;
  spec.iterations = iterations;
  spec.duration = duration;
  return spec;
}

// ---------------------------------------------------------------------------

Seconds time_above_threshold(const ActivityRecord& r, const TyreModel& model, double threshold) {
  const Seconds d = r.end - r.start;
  if (d <= 0.0) return 0.0;
  const double ys = r.tyre_start;
  if (r.type == ActivityType::transit) {
    const Seconds full = r.nominal + r.delay;
    const double fraction = full > 0.0 ? std::min(1.0, d / full) : 1.0;
    const double ye = ys + model.heating_rate * to_hours(r.nominal) * fraction;
    if (ys > threshold && ye > threshold) return d;
    if (ys <= threshold && ye <= threshold) return 0.0;
    const Seconds cross = d * (threshold - ys) / (ye - ys);
    return ye > threshold ? d - cross : cross;
  }
  if (ys <= threshold) return 0.0;
  if (threshold <= model.ambient) return d;
  const Seconds to_threshold = hours(std::log((ys - model.ambient) / (threshold - model.ambient)) / model.cooling_rate);
  return std::min(d, to_threshold);
}

KpiRecord compute_kpis(const DecisionLog& log, const SimState& final_state, Seconds duration,
                       const ErrorFunctionSpec& err) {
  const auto& config = final_state.config();
  KpiRecord k;
  const TyreModel* tyre =
      final_state.options().constraints.contains(ConstraintKind::tyre) ? config.tyre_model() : nullptr;
  for (const auto& r : final_state.trace()) {
    const Seconds d = r.end - r.start;
    switch (r.type) {
      case ActivityType::transit:
      case ActivityType::load:
      case ActivityType::unload: k.operational += d; break;
      case ActivityType::queue: k.queuing += d; break;
      case ActivityType::charge: k.charging += d; break;
      case ActivityType::park: k.parking += d; break;
    }
    if (r.type == ActivityType::transit) k.tyre_delay += r.delay;
    if (r.type == ActivityType::queue) k.ratio_delay += r.delay;
    if (tyre != nullptr) k.hot_tyre += time_above_threshold(r, *tyre, tyre->soft_threshold);
  }
  for (const auto& o : final_state.outages()) k.idle += std::max(0.0, duration - o.since);
  for (const auto& t : final_state.trucks()) {
    if (!t.disabled && t.awaiting_decision) k.idle += std::max(0.0, duration - t.activity_end);
  }
  k.fleet_time = static_cast<double>(final_state.trucks().size()) * duration;
  k.score = objective_score(final_state.flow_log(), config.tasks, duration, err);
  k.material = final_state.flow_log().total_tonnes();
  k.battery_violations = final_state.violation_count(ConstraintKind::battery);
  k.tyre_violations = final_state.violation_count(ConstraintKind::tyre);
  k.capacity_violations = final_state.violation_count(ConstraintKind::capacity);
  k.ratio_violations = final_state.violation_count(ConstraintKind::ratio);
  k.decisions = static_cast<int>(log.size());
  double wall = 0.0;
  int searched = 0;
  for (const auto& rec : log) {
    if (rec.forced) {
      ++k.forced_decisions;
    } else {
      wall += rec.search.wall_time_ms;
      ++searched;
    }
  }
  k.wall_per_decision_ms = searched > 0 ? wall / searched : 0.0;
  return k;
}

RunOutcome run_single(const MineConfig& config, const RunSpec& spec) {
  const ConstraintSet active = experiment_constraints(spec.constraint);
  for (auto kind : {ConstraintKind::battery, ConstraintKind::tyre, ConstraintKind::capacity, ConstraintKind::ratio}) {
    if (active.contains(kind) && config.constraint(kind) == nullptr) {
      throw ConfigError("scenario has no '" + std::string(to_string(kind)) + "' constraint block");
    }
  }
  const bool baseline = spec.planner == PlannerKind::fast_hc;

  SimOptions world_options;
  world_options.constraints = active;
  world_options.record_trace = true;
  if (baseline && active.contains(ConstraintKind::ratio)) world_options.admission = &ratio_buffer_guard;

  SearchConfig search;
  search.iterations = spec.iterations;
  search.seed = spec.seed;
  search.discount = make_discount(spec.reward_duration, spec.horizon_factor, spec.halftime_factor, spec.step);
  search.generator_constraints = baseline ? ConstraintSet{} : active;

  DecisionOverride override;
  if (baseline) {
    HeuristicConfig heuristics;
    for (auto kind : {ConstraintKind::battery, ConstraintKind::tyre, ConstraintKind::capacity}) {
      if (active.contains(kind)) heuristics.guards.insert(kind);
    }
    heuristics.capacity_min_trucks = spec.capacity_min_trucks;
    if (!heuristics.guards.empty()) override = make_heuristic_dispatcher(config, heuristics);
  }

  auto result = run_receding_horizon(SimState(config, world_options), spec.duration, search, override);
  RunOutcome out;
  out.spec = spec;
  out.kpis = compute_kpis(result.log, result.final_state, spec.duration, search.error);
  out.log = std::move(result.log);
  out.trace = result.final_state.trace();
  return out;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& kpi_names() {
  static const std::vector<std::string> names = {
      "score",          "material",           "operational",     "queuing",
      "charging",       "parking",            "idle",            "hot_tyre",
      "tyre_delay",     "ratio_delay",        "battery_violations", "tyre_violations",
      "capacity_violations", "ratio_violations", "decisions"};
  return names;
}

double kpi_value(const KpiRecord& k, std::string_view name) {
  if (name == "score") return k.score;
  if (name == "material") return k.material;
  if (name == "operational") return k.operational;
  if (name == "queuing") return k.queuing;
  if (name == "charging") return k.charging;
  if (name == "parking") return k.parking;
  if (name == "idle") return k.idle;
  if (name == "hot_tyre") return k.hot_tyre;
  if (name == "tyre_delay") return k.tyre_delay;
  if (name == "ratio_delay") return k.ratio_delay;
  if (name == "battery_violations") return k.battery_violations;
  if (name == "tyre_violations") return k.tyre_violations;
  if (name == "capacity_violations") return k.capacity_violations;
  if (name == "ratio_violations") return k.ratio_violations;
  if (name == "decisions") return k.decisions;
  throw std::invalid_argument("unknown KPI '" + std::string(name) + "'");
}

std::pair<double, double> mean_stddev(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void emit_plot_data(const std::vector<CellSummary>& cells, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<const CellSummary*> sorted;
  for (const auto& c : cells) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(), [](const CellSummary* a, const CellSummary* b) {
    return std::tie(a->horizon_factor, a->halftime_factor) < std::tie(b->horizon_factor, b->halftime_factor);
  });
  for (const auto& name : kpi_names()) {
    auto out = open_output(out_dir / ("kpi_" + name + ".csv"));
    out << "f_hz,f_hf,mean,stddev,n\n";
    for (const auto* cell : sorted) {
      std::vector<double> values;
      for (const auto& k : cell->runs) values.push_back(kpi_value(k, name));
      const auto [mean, sd] = mean_stddev(values);
      out << fmt(cell->horizon_factor) << ',' << fmt(cell->halftime_factor) << ',' << fmt(mean) << ',' << fmt(sd)
          << ',' << values.size() << '\n';
    }
  }
}

void write_trace_csv(const std::vector<ActivityRecord>& trace, const MineConfig& config,
                     const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "time,truck,activity_type,location,duration,battery,tyre_temp,delivered_tonnes\n";
  for (const auto& r : trace) {
    out << fmt(r.start) << ',' << config.trucks[r.truck].id << ',' << to_string(r.type) << ','
        << config.network.location(r.location).id << ',' << fmt(r.end - r.start) << ',' << fmt(r.battery_end) << ','
        << fmt(r.tyre_end) << ',' << fmt(r.delivered) << '\n';
  }
}

void write_search_stats(const DecisionLog& log, const MineConfig& config, const std::filesystem::path& path) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& rec : log) {
    nlohmann::json children = nlohmann::json::array();
    for (const auto& c : rec.search.root_children) {
      children.push_back({{"action", action_label(c.action, config)}, {"visits", c.visits}, {"mean", c.mean}});
    }
    doc.push_back({{"decision_time", rec.time},
                   {"truck", config.trucks[rec.truck].id},
                   {"chosen_action", action_label(rec.action, config)},
                   {"forced", rec.forced},
                   {"root_children", children},
                   {"wall_time_ms", rec.search.wall_time_ms}});
  }
  auto out = open_output(path);
  out << doc.dump(1) << '\n';
}

int configured_threads() {
  if (const char* env = std::getenv("DISPATCH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<CellSummary> run_experiment(const MineConfig& config, ExperimentConstraint constraint,
                                        PlannerKind planner, const SweepSpec& sweep,
                                        const ExperimentOptions& options) {
  sweep.validate();
  struct Job {
    std::size_t cell;
    int replication;
    RunSpec spec;
  };
  std::vector<CellSummary> cells;
  std::vector<Job> jobs;
  for (double fhz : sweep.horizon_factors) {
    for (double fhf : sweep.halftime_factors) {
      cells.push_back({fhz, fhf, {}});
      for (int r = 0; r < sweep.replications; ++r) {
        RunSpec spec;
        spec.constraint = constraint;
        spec.planner = planner;
        spec.reward_duration = sweep.reward_duration;
        spec.horizon_factor = fhz;
        spec.halftime_factor = fhf;
        spec.seed = sweep.base_seed + static_cast<std::uint64_t>(r);
        spec.iterations = sweep.iterations;
        spec.duration = sweep.duration;
        spec.step = sweep.step;
        jobs.push_back({cells.size() - 1, r, spec});
      }
    }
  }

  std::vector<std::optional<RunOutcome>> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        outcomes[j] = run_single(config, jobs[j].spec);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(options.threads > 0 ? options.threads : configured_threads(),
                                    static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::filesystem::create_directories(options.out_dir);
  auto runs = open_output(options.out_dir / "runs.csv");
  auto timing = open_output(options.out_dir / "timing.csv");
  runs << "f_hz,f_hf,replication,seed";
  for (const auto& name : kpi_names()) runs << ',' << name;
  runs << '\n';
  timing << "f_hz,f_hf,replication,decisions,forced_decisions,wall_per_decision_ms\n";
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& job = jobs[j];
    const auto& outcome = *outcomes[j];
    cells[job.cell].runs.push_back(outcome.kpis);
    const std::string prefix =
        fmt(job.spec.horizon_factor) + ',' + fmt(job.spec.halftime_factor) + ',' + std::to_string(job.replication);
    runs << prefix << ',' << job.spec.seed;
    for (const auto& name : kpi_names()) runs << ',' << fmt(kpi_value(outcome.kpis, name));
    runs << '\n';
    timing << prefix << ',' << outcome.kpis.decisions << ',' << outcome.kpis.forced_decisions << ','
           << fmt(outcome.kpis.wall_per_decision_ms) << '\n';
    const std::string stem = "run_fhz" + fmt(job.spec.horizon_factor) + "_fhf" + fmt(job.spec.halftime_factor) +
                             "_rep" + std::to_string(job.replication);
    if (options.write_trace) write_trace_csv(outcome.trace, config, options.out_dir / (stem + "_trace.csv"));
    if (options.write_search_stats) {
      write_search_stats(outcome.log, config, options.out_dir / (stem + "_search.json"));
    }
  }
  emit_plot_data(cells, options.out_dir);
  return cells;
}

}  // namespace dispatch
