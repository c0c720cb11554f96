#include "minedispatch/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace dispatch {

namespace {

int active_trucks(const SimState& state) {
  return static_cast<int>(std::count_if(state.trucks().begin(), state.trucks().end(),
                                        [](const TruckState& t) { return !t.disabled; }));
}

ActivityType service_at(const MineConfig& config, LocationIndex location) {
  switch (config.network.location(location).kind) {
    case LocationKind::loading_station: return ActivityType::load;
    case LocationKind::charging_bay: return ActivityType::charge;
    default: return ActivityType::unload;
  }
}

// Conservative queue wait when arriving at `location`.
Seconds wait_bound(const SimState& state, TruckIndex truck, LocationIndex location) {
  const auto& config = state.config();
  const Seconds forecast = activity_duration(state, truck, {ActivityType::queue, location}).wait;
  const Seconds service = config.nominal_duration(location, service_at(config, location), config.trucks[truck]);
  Seconds bound = (active_trucks(state) - 1) * service;
  if (const CrusherBin* bin = state.crusher_at(location)) {
    bound += hours(bin->model->capacity / bin->model->processing_rate);
  }
  return std::max(forecast, bound);
}

const CrusherModel* capacity_crusher(const MineConfig& config) {
  const ConstraintSpec* spec = config.constraint(ConstraintKind::capacity);
  if (spec == nullptr) return nullptr;
  return config.crusher_at(std::get<CapacityLimit>(spec->params).crusher);
}

}  // namespace

double projected_battery(const SimState& state, TruckIndex truck, TaskIndex task) {
  const auto& config = state.config();
  const auto* model = config.battery_model();
  if (model == nullptr) throw std::invalid_argument("battery projection without a battery model");
  const auto& t = state.truck(truck);
  const auto& spec = config.trucks[truck];
  const auto& ht = config.tasks.at(task);
  const auto bay = config.first_location_of(LocationKind::charging_bay);
  if (!bay) throw std::invalid_argument("battery projection without a charging bay");

  double b = t.battery;
  auto run = [&](ActivityType type, Seconds d) { b += model->rate(type) * to_hours(d); };
  run(ActivityType::transit, transit_duration(config.network, t.location, ht.source));
  run(ActivityType::queue, wait_bound(state, truck, ht.source));
  run(ActivityType::load, config.nominal_duration(ht.source, ActivityType::load, spec));
  run(ActivityType::transit, transit_duration(config.network, ht.source, ht.destination));
  run(ActivityType::queue, wait_bound(state, truck, ht.destination));
  run(ActivityType::unload, config.nominal_duration(ht.destination, ActivityType::unload, spec));
  run(ActivityType::transit, transit_duration(config.network, ht.destination, *bay));
  return b;
}

double projected_peak_tyre(const SimState& state, TruckIndex truck, TaskIndex task) {
  const auto& config = state.config();
  const auto* model = config.tyre_model();
  if (model == nullptr) throw std::invalid_argument("tyre projection without a tyre model");
  const auto& t = state.truck(truck);
  const auto& spec = config.trucks[truck];
  const auto& ht = config.tasks.at(task);
  const auto bay = config.first_location_of(LocationKind::parking_bay);
  if (!bay) throw std::invalid_argument("tyre projection without a parking bay");

  double y = t.tyre;
  double peak = y;
  auto heat = [&](LocationIndex from, LocationIndex to) {
    y = update_tyre_temperature(y, ActivityType::transit, transit_duration(config.network, from, to), *model);
    peak = std::max(peak, y);
  };
  auto cool = [&](LocationIndex at, ActivityType type) {
    y = update_tyre_temperature(y, type, config.nominal_duration(at, type, spec), *model);
  };
  heat(t.location, ht.source);
  cool(ht.source, ActivityType::load);
  heat(ht.source, ht.destination);
  cool(ht.destination, ActivityType::unload);
  heat(ht.destination, *bay);
  return peak;
}

bool lookahead_requires_action(const SimState& state, TruckIndex truck, ConstraintKind kind) {
  const auto& config = state.config();
  for (std::size_t k = 0; k < config.tasks.size(); ++k) {
    const auto task = static_cast<TaskIndex>(k);
    if (kind == ConstraintKind::battery) {
      if (projected_battery(state, truck, task) < config.battery_model()->min_level) return true;
    } else if (kind == ConstraintKind::tyre) {
      if (projected_peak_tyre(state, truck, task) > config.tyre_model()->hard_limit) return true;
    }
  }
  return false;
}

Action lookahead_guard(const SimState& state, TruckIndex truck, Action candidate, ConstraintKind kind) {
  if (candidate.kind != ActionKind::task) return candidate;
  if (!lookahead_requires_action(state, truck, kind)) return candidate;
  return kind == ConstraintKind::battery ? Action::charge() : Action::park();
}

int default_capacity_minimum(const MineConfig& config) {
  const CrusherModel* crusher = capacity_crusher(config);
  if (crusher == nullptr) return 0;
  double demand = 0.0;
  double best_rate = 0.0;
  for (const auto& task : config.tasks) {
    if (task.destination != crusher->location) continue;
    demand += task.target_rate;
    for (const auto& truck : config.trucks) {
      const Seconds cycle = config.network.shortest(task.destination, task.source) +
                            config.nominal_duration(task.source, ActivityType::load, truck) +
                            config.network.shortest(task.source, task.destination) +
                            config.nominal_duration(task.destination, ActivityType::unload, truck);
      if (cycle > 0.0 && std::isfinite(cycle)) best_rate = std::max(best_rate, truck.capacity / to_hours(cycle));
    }
  }
  if (demand <= 0.0 || best_rate <= 0.0) return 0;
  return static_cast<int>(std::ceil(demand / best_rate - 1e-9));
}

int trucks_serving_crusher(const SimState& state, TruckIndex except) {
  const CrusherModel* crusher = capacity_crusher(state.config());
  if (crusher == nullptr) return 0;
  int n = 0;
  for (const auto& t : state.trucks()) {
    if (t.id == except || t.disabled || !t.assignment || t.assignment->kind != ActionKind::task) continue;
    if (state.config().tasks[t.assignment->task].destination == crusher->location) ++n;
  }
  return n;
}

std::optional<Action> capacity_guard(const SimState& state, TruckIndex truck, int minimum) {
  const auto& config = state.config();
  if (minimum > static_cast<int>(config.trucks.size())) {
    throw ConfigError("capacity heuristic minimum exceeds the fleet size");
  }
  const CrusherModel* crusher = capacity_crusher(config);
  if (minimum <= 0 || crusher == nullptr) return std::nullopt;
  if (trucks_serving_crusher(state, truck) >= minimum) return std::nullopt;
  std::optional<Action> best;
  double best_shortfall = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < config.tasks.size(); ++k) {
    const auto& task = config.tasks[k];
    if (task.destination != crusher->location) continue;
    const double shortfall = goal_volume(task, state.clock()) -
                             state.flow_log().cumulative(task.source, task.destination, state.clock());
    if (shortfall > best_shortfall) {
      best_shortfall = shortfall;
      best = Action::haul(static_cast<TaskIndex>(k));
    }
  }
  return best;
}

bool ratio_buffer_admits(const CrusherBin& bin, MaterialIndex material, double tonnes) {
  const auto& targets = bin.model->ratio_targets;
  if (targets.empty() || bin.total() <= 1e-9) return true;
  const RatioTarget* lowest = &targets.front();
  double share_sum = 0.0;
  for (const auto& t : targets) {
    share_sum += t.share;
    if (t.share < lowest->share) lowest = &t;
  }
  if (material != lowest->material) return true;
  const double after = (bin.volumes[material] + tonnes) / (bin.total() + tonnes);
  return after <= lowest->share / share_sum;
}

bool ratio_buffer_guard(const SimState& state, TruckIndex truck) {
  const auto& t = state.truck(truck);
  const CrusherBin* bin = state.crusher_at(t.station);
  if (bin == nullptr || t.load_tonnes <= 0.0) return true;
  return ratio_buffer_admits(*bin, t.load_material, t.load_tonnes);
}

DecisionOverride make_heuristic_dispatcher(const MineConfig& config, HeuristicConfig heuristics) {
  int minimum = 0;
  if (heuristics.guards.contains(ConstraintKind::capacity)) {
    minimum = heuristics.capacity_min_trucks >= 0 ? heuristics.capacity_min_trucks : default_capacity_minimum(config);
    if (minimum > static_cast<int>(config.trucks.size())) {
      throw ConfigError("capacity heuristic minimum exceeds the fleet size");
    }
  }
  return [guards = heuristics.guards, minimum](const SimState& world, TruckIndex truck) -> std::optional<Action> {
    if (guards.contains(ConstraintKind::battery) && lookahead_requires_action(world, truck, ConstraintKind::battery)) {
      return Action::charge();
    }
    if (guards.contains(ConstraintKind::tyre) && lookahead_requires_action(world, truck, ConstraintKind::tyre)) {
      return Action::park();
    }
    if (guards.contains(ConstraintKind::capacity)) return capacity_guard(world, truck, minimum);
    return std::nullopt;
  };
}

}  // namespace dispatch
