#pragma once

#include "minedispatch/mcts_planner.hpp"

namespace dispatch {

/// Settings of the heuristic controllers layered on unconstrained FAST.
struct HeuristicConfig {
  ConstraintSet guards;   // which controllers run
  int capacity_min_trucks = -1;  // -1: derive from crusher demand
};

/// Battery level at the end of `task` followed by transit to the charging
/// bay. Station waits use the larger of the forecast from the current queues
/// and a bound of one nominal service per other active truck; at a crusher
/// the time to drain a full bin is added.
double projected_battery(const SimState& state, TruckIndex truck, TaskIndex task);

/// Highest tyre temperature reached at the end of each transit of `task`
/// followed by transit to the parking bay. Cooling is credited only for the
/// nominal load and unload durations.
double projected_peak_tyre(const SimState& state, TruckIndex truck, TaskIndex task);

/// True if any task projects a hard-limit violation for the given constraint.
bool lookahead_requires_action(const SimState& state, TruckIndex truck, ConstraintKind kind);

/// Returns `candidate`, or the constraint action (charge for battery, park
/// for tyre) when any task projects a hard-limit violation.
Action lookahead_guard(const SimState& state, TruckIndex truck, Action candidate, ConstraintKind kind);

/// ceil(crusher target rate / best single-truck delivery rate) for the
/// capacity-limited crusher.
int default_capacity_minimum(const MineConfig& config);

/// Trucks other than `except` whose current assignment unloads at the
/// capacity-limited crusher.
int trucks_serving_crusher(const SimState& state, TruckIndex except);

/// Forced crusher task when fewer than `minimum` trucks serve the crusher:
/// the crusher task with the largest cumulative shortfall, lowest id on ties.
/// Throws ConfigError if the minimum exceeds the fleet.
std::optional<Action> capacity_guard(const SimState& state, TruckIndex truck, int minimum);

/// Buffer-queue rule at the ratio-limited crusher: false (hold) iff the truck
/// carries the material with the smallest target share and unloading would
/// lift that material's share of the bin above its share of the target mix.
/// An empty bin admits everything.
bool ratio_buffer_admits(const CrusherBin& bin, MaterialIndex material, double tonnes);

/// AdmissionRule adaptor over ratio_buffer_admits.
bool ratio_buffer_guard(const SimState& state, TruckIndex truck);

/// Decision override implementing FAST-HC for the constraints in `heuristics`.
DecisionOverride make_heuristic_dispatcher(const MineConfig& config, HeuristicConfig heuristics);

}  // namespace dispatch
