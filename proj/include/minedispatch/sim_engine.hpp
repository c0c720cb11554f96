#pragma once

#include <vector>

#include "minedispatch/mine_model.hpp"
#include "minedispatch/objective.hpp"
#include "minedispatch/opportunity_cost.hpp"

namespace dispatch {

enum class ActionKind : std::uint8_t { task, charge, park };

/// A dispatch decision: a haulage task or one of the constraint actions.
struct Action {
  ActionKind kind = ActionKind::task;
  TaskIndex task = kNoIndex;

  static constexpr Action haul(TaskIndex t) { return {ActionKind::task, t}; }
  static constexpr Action charge() { return {ActionKind::charge, kNoIndex}; }
  static constexpr Action park() { return {ActionKind::park, kNoIndex}; }
  constexpr bool operator==(const Action&) const = default;
};

std::string action_label(const Action& action, const MineConfig& config);
std::optional<Action> parse_action(std::string_view label, const MineConfig& config);

struct PlannedActivity {
  ActivityType type = ActivityType::transit;
  LocationIndex location = kNoIndex;  // destination for transit
};

class SimState;

/// Admission filter applied when a crusher server frees up: return false to
/// hold the truck in the buffer queue.
using AdmissionRule = bool (*)(const SimState& state, TruckIndex truck);

struct SimOptions {
  ConstraintSet constraints;  // constraint families whose dynamics and delays are modelled
  bool record_trace = false;
  AdmissionRule admission = nullptr;
};

struct TruckState {
  TruckIndex id = kNoIndex;
  LocationIndex location = kNoIndex;  // location of the current activity
  ActivityType activity = ActivityType::park;
  Seconds activity_start = 0.0;
  Seconds activity_end = 0.0;
  Seconds activity_nominal = 0.0;
  ViolationDelay activity_delay;
  double battery = 100.0;
  double tyre = 35.0;
  double battery_at_start = 100.0;
  double tyre_at_start = 35.0;

  MaterialIndex load_material = kNoIndex;
  LocationIndex load_source = kNoIndex;
  double load_tonnes = 0.0;

  std::optional<Action> assignment;
  std::array<PlannedActivity, 6> pending{};
  std::uint8_t pending_head = 0;
  std::uint8_t pending_count = 0;

  LocationIndex station = kNoIndex;  // station where the truck waits or is served
  std::uint32_t queue_seq = 0;
  bool in_service = false;  // holds a station server
  bool held = false;        // parked in the ratio buffer queue
  bool awaiting_decision = true;
  bool disabled = false;
  int decision = -1;

  bool has_pending() const { return pending_count > 0; }
  const PlannedActivity& next_pending() const { return pending[pending_head]; }
};

/// Loading, unloading and charging stations. Servers are FIFO; the queue is
/// the set of trucks with `station == location` ordered by queue_seq.
struct StationState {
  LocationIndex location = kNoIndex;
  std::uint8_t servers = 0;  // 0: no station (parking bay)
  std::uint8_t busy = 0;
  std::int16_t crusher = -1;  // index into crusher bins
  Seconds wakeup = kNever;
};

struct ActivityRecord {
  TruckIndex truck = kNoIndex;
  ActivityType type = ActivityType::transit;
  LocationIndex location = kNoIndex;
  Seconds start = 0.0;
  Seconds end = 0.0;
  Seconds nominal = 0.0;
  Seconds delay = 0.0;
  bool infinite_delay = false;
  double battery_start = 0.0;
  double battery_end = 0.0;
  double tyre_start = 0.0;
  double tyre_end = 0.0;
  double delivered = 0.0;
  int decision = -1;
  bool truncated = false;
};

struct DecisionPoint {
  TruckIndex truck = kNoIndex;
  Seconds time = 0.0;
  constexpr bool operator==(const DecisionPoint&) const = default;
};

/// Forecast of an activity begun now: queue wait plus service (or travel) time.
struct ActivityForecast {
  Seconds wait = 0.0;
  Seconds duration = 0.0;
  Seconds total() const { return wait + duration; }
};

class SimState {
 public:
  SimState(const MineConfig& config, SimOptions options);

  const MineConfig& config() const { return *config_; }
  const SimOptions& options() const { return options_; }
  /// Changing the modelled constraints of a clone is how planners build
  /// their generator model from the live state.
  void set_options(SimOptions options) { options_ = options; }

  Seconds clock() const { return clock_; }
  const std::vector<TruckState>& trucks() const { return trucks_; }
  const TruckState& truck(TruckIndex i) const { return trucks_.at(i); }
  const std::vector<StationState>& stations() const { return stations_; }
  const std::vector<CrusherBin>& crushers() const { return crushers_; }
  const CrusherBin* crusher_at(LocationIndex location) const;
  const FlowLog& flow_log() const { return flow_log_; }
  const std::vector<TruckOutage>& outages() const { return outages_; }
  const std::vector<ActivityRecord>& trace() const { return trace_; }
  int decisions_applied() const { return decisions_; }
  double loaded_tonnes() const { return loaded_tonnes_; }
  std::size_t activities_completed() const { return activities_completed_; }
  /// Hard-violation and soft-delay tallies.
  int violation_count(ConstraintKind kind) const { return violations_[static_cast<std::size_t>(kind)]; }

  /// FIFO queue (waiting trucks, excluding those being served) at a station.
  std::vector<TruckIndex> station_queue(LocationIndex location) const;

  /// Folds the flow log into base totals; used for planning clones.
  void compact_flow_log() { flow_log_.compact(); }
  /// Makes a copy cheap to clone repeatedly: compacted log, no trace.
  void prepare_for_planning();

  /// Records in-progress activities truncated at `end` and stops the trace.
  void close_trace(Seconds end);

  // Advanced use by tests: override initial values before the first decision.
  void set_battery(TruckIndex i, double level);
  void set_tyre(TruckIndex i, double temp);
  void set_bin_volumes(std::size_t crusher, std::vector<double> volumes);

 private:
  friend std::optional<DecisionPoint> advance_to_decision(SimState& state, Seconds limit);
  friend void apply_decision(SimState& state, TruckIndex truck, Action action);
  friend void step_stations(SimState& state, Seconds to_time);
  friend ActivityForecast activity_duration(const SimState& state, TruckIndex truck, const PlannedActivity& activity);

  void start_next_activity(TruckIndex i);
  void begin_service(TruckIndex i);
  void complete_activity(TruckIndex i);
  void on_truck_event(TruckIndex i);
  void try_serve(LocationIndex station);
  void release_server(TruckState& t);
  void disable(TruckIndex i, ConstraintKind cause);
  void record(const TruckState& t, Seconds end, double delivered, bool truncated);
  Seconds crusher_room_wait(const TruckState& t, const CrusherBin& bin) const;
  bool modelled(ConstraintKind k) const { return options_.constraints.contains(k); }

  const MineConfig* config_;
  SimOptions options_;
  Seconds clock_ = 0.0;
  std::vector<TruckState> trucks_;
  std::vector<StationState> stations_;  // one per location
  std::vector<CrusherBin> crushers_;
  FlowLog flow_log_;
  std::vector<TruckOutage> outages_;
  std::vector<ActivityRecord> trace_;
  std::array<int, 4> violations_{};
  std::uint32_t next_queue_seq_ = 0;
  int decisions_ = 0;
  int wakeups_pending_ = 0;
  double loaded_tonnes_ = 0.0;
  std::size_t activities_completed_ = 0;
};

/// Truck with the minimal current activity end time; ties go to the lowest id.
/// Disabled trucks and trucks waiting for a server never qualify.
std::optional<DecisionPoint> next_decision_point(const SimState& state);

/// Processes events up to `limit` until a truck needs a decision strictly
/// before `limit`. Returns nullopt (with the clock at `limit`) otherwise.
std::optional<DecisionPoint> advance_to_decision(SimState& state, Seconds limit);

/// Expands the action into its activity sequence for a truck awaiting a
/// decision and starts the first activity. Throws std::invalid_argument for
/// unknown tasks or missing charging/parking bays, std::logic_error if the
/// truck is not at a decision point.
void apply_decision(SimState& state, TruckIndex truck, Action action);

/// Forecast for `truck` starting `activity` now (queue wait from the FIFO
/// timeline of the station, nominal service, shortest-path transit).
ActivityForecast activity_duration(const SimState& state, TruckIndex truck, const PlannedActivity& activity);

/// Drains crusher bins up to `to_time` and moves the clock. Requires
/// to_time >= clock.
void step_stations(SimState& state, Seconds to_time);

/// The activity sequence an action expands to from a given location.
std::vector<PlannedActivity> expand_action(const MineConfig& config, LocationIndex from, Action action);

}  // namespace dispatch
