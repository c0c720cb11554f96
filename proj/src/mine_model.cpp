#include "minedispatch/mine_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dispatch {

std::string_view to_string(LocationKind kind) {
  switch (kind) {
    case LocationKind::loading_station: return "loading-station";
    case LocationKind::unloading_station: return "unloading-station";
    case LocationKind::charging_bay: return "charging-bay";
    case LocationKind::parking_bay: return "parking-bay";
  }
  return "?";
}

std::optional<LocationKind> parse_location_kind(std::string_view name) {
  for (auto k : {LocationKind::loading_station, LocationKind::unloading_station, LocationKind::charging_bay,
                 LocationKind::parking_bay}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

RoadNetwork::RoadNetwork(std::vector<Location> locations, std::vector<Edge> edges)
    : locations_(std::move(locations)), edges_(std::move(edges)) {
  const std::size_t n = locations_.size();
  distance_.assign(n * n, kNever);
  for (std::size_t i = 0; i < n; ++i) distance_[i * n + i] = 0.0;
  for (const auto& e : edges_) {
    if (e.from >= n || e.to >= n || e.from == e.to) continue;
    auto& d = distance_[e.from * n + e.to];
    d = std::min(d, e.weight);
  }
  // Floyd-Warshall; networks are a few dozen locations at most.
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const Seconds dik = distance_[i * n + k];
      if (dik == kNever) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const Seconds via = dik + distance_[k * n + j];
        if (via < distance_[i * n + j]) distance_[i * n + j] = via;
      }
    }
  }
}

std::optional<LocationIndex> RoadNetwork::find(std::string_view id) const {
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    if (locations_[i].id == id) return static_cast<LocationIndex>(i);
  }
  return std::nullopt;
}

Seconds transit_duration(const RoadNetwork& network, LocationIndex from, LocationIndex to) {
  if (from >= network.size() || to >= network.size()) throw std::out_of_range("unknown location");
  const Seconds d = network.shortest(from, to);
  if (d == kNever) {
    throw UnreachableError("unreachable: no path from " + network.location(from).id + " to " +
                           network.location(to).id);
  }
  return d;
}

void ActivityCatalogue::set(Activity activity) {
  for (auto& e : entries_) {
    if (e.location == activity.location && e.type == activity.type) {
      e = activity;
      return;
    }
  }
  entries_.push_back(activity);
}

std::optional<Seconds> ActivityCatalogue::find(LocationIndex location, ActivityType type) const {
  for (const auto& e : entries_) {
    if (e.location == location && e.type == type) return e.nominal_duration;
  }
  return std::nullopt;
}

std::optional<MaterialIndex> MineConfig::find_material(std::string_view id) const {
  for (std::size_t i = 0; i < materials.size(); ++i) {
    if (materials[i].id == id) return static_cast<MaterialIndex>(i);
  }
  return std::nullopt;
}

std::optional<TaskIndex> MineConfig::find_task(std::string_view id) const {
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].id == id) return static_cast<TaskIndex>(i);
  }
  return std::nullopt;
}

std::optional<LocationIndex> MineConfig::first_location_of(LocationKind kind) const {
  const auto& locs = network.locations();
  for (std::size_t i = 0; i < locs.size(); ++i) {
    if (locs[i].kind == kind) return static_cast<LocationIndex>(i);
  }
  return std::nullopt;
}

const CrusherModel* MineConfig::crusher_at(LocationIndex location) const {
  for (const auto& c : interaction.crushers) {
    if (c.location == location) return &c;
  }
  return nullptr;
}

const ConstraintSpec* MineConfig::constraint(ConstraintKind kind) const {
  for (const auto& c : constraints) {
    if (c.kind == kind) return &c;
  }
  return nullptr;
}

const BatteryModel* MineConfig::battery_model() const {
  const auto* c = constraint(ConstraintKind::battery);
  return c ? &std::get<BatteryModel>(c->params) : nullptr;
}

const TyreModel* MineConfig::tyre_model() const {
  const auto* c = constraint(ConstraintKind::tyre);
  return c ? &std::get<TyreModel>(c->params) : nullptr;
}

Seconds MineConfig::nominal_duration(LocationIndex location, ActivityType type, const Truck& truck) const {
  if (auto d = activities.find(location, type)) return *d;
  switch (type) {
    case ActivityType::load: return hours(truck.capacity / interaction.loader_rate);
    case ActivityType::unload: return hours(truck.capacity / interaction.unloader_rate);
    default: return 0.0;
  }
}

bool ValidationReport::contains(std::string_view fragment) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const std::string& v) { return v.find(fragment) != std::string::npos; });
}

namespace {

template <typename Range, typename Key>
void check_unique(const Range& items, Key key, std::string_view what, std::vector<std::string>& out) {
  std::set<std::string> seen;
  for (const auto& item : items) {
    const std::string& id = key(item);
    if (!seen.insert(id).second) out.push_back("duplicate " + std::string(what) + " id '" + id + "'");
  }
}

}  // namespace

ValidationReport validate_scenario(const MineConfig& config) {
  ValidationReport report;
  auto& out = report.violations;
  const auto& net = config.network;
  const std::size_t n_loc = net.size();
  auto valid_loc = [&](LocationIndex l) { return l < n_loc; };
  auto loc_name = [&](LocationIndex l) { return valid_loc(l) ? net.location(l).id : std::string("<unknown>"); };

  check_unique(config.materials, [](const Material& m) -> const std::string& { return m.id; }, "material", out);
  check_unique(net.locations(), [](const Location& l) -> const std::string& { return l.id; }, "location", out);
  check_unique(config.trucks, [](const Truck& t) -> const std::string& { return t.id; }, "truck", out);
  check_unique(config.tasks, [](const HaulageTask& t) -> const std::string& { return t.id; }, "task", out);

  if (n_loc == 0) out.push_back("road network has no locations");
  for (const auto& e : net.edges()) {
    if (!valid_loc(e.from) || !valid_loc(e.to)) {
      out.push_back("edge references unknown location");
      continue;
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      out.push_back("non-positive edge weight on " + loc_name(e.from) + " -> " + loc_name(e.to));
    }
  }

  if (config.trucks.empty()) out.push_back("scenario has no trucks");
  for (const auto& t : config.trucks) {
    if (!(t.capacity > 0.0)) out.push_back("truck '" + t.id + "' has non-positive capacity");
    if (t.initial_battery < 0.0 || t.initial_battery > 100.0) {
      out.push_back("truck '" + t.id + "' initial battery outside [0,100]");
    }
    if (t.initial_tyre < 35.0 || t.initial_tyre > 95.0) {
      out.push_back("truck '" + t.id + "' initial tyre temperature outside [35,95]");
    }
    if (!valid_loc(t.start)) out.push_back("truck '" + t.id + "' start location unknown");
  }

  if (config.tasks.empty()) out.push_back("scenario has no tasks");
  // Locations that must be mutually reachable.
  std::set<LocationIndex> used;
  for (const auto& task : config.tasks) {
    if (!(task.target_rate > 0.0)) out.push_back("task '" + task.id + "' has non-positive target rate");
    if (task.material >= config.materials.size()) out.push_back("task '" + task.id + "' material unknown");
    if (!valid_loc(task.source) || !valid_loc(task.destination)) {
      out.push_back("task '" + task.id + "' endpoint not in road network");
      continue;
    }
    if (net.location(task.source).kind != LocationKind::loading_station ||
        net.location(task.destination).kind != LocationKind::unloading_station) {
      out.push_back("task endpoint kind mismatch for task '" + task.id + "'");
    }
    used.insert(task.source);
    used.insert(task.destination);
  }
  for (const auto& t : config.trucks) {
    if (valid_loc(t.start)) used.insert(t.start);
  }

  for (const auto& a : config.activities.entries()) {
    if (!(a.nominal_duration >= 0.0)) out.push_back("negative nominal duration at " + loc_name(a.location));
    if (!valid_loc(a.location)) out.push_back("activity references unknown location");
  }

  const auto& inter = config.interaction;
  if (inter.charging_stations < 1) out.push_back("charging_stations must be >= 1");
  if (!(inter.loader_rate > 0.0) || !(inter.unloader_rate > 0.0)) out.push_back("handling rates must be > 0");
  if (!(inter.break_length > 0.0)) out.push_back("break_length must be > 0");
  for (const auto& c : inter.crushers) {
    if (!valid_loc(c.location) || net.location(c.location).kind != LocationKind::unloading_station) {
      out.push_back("crusher location must be an unloading-station");
    }
    if (!(c.capacity > 0.0)) out.push_back("crusher capacity must be > 0");
    if (!(c.processing_rate > 0.0)) out.push_back("crusher processing rate must be > 0");
    if (c.min_volume < 0.0 || c.min_volume >= c.capacity) out.push_back("crusher V_min must be in [0, V_max)");
    if (c.initial_volume.size() != config.materials.size()) {
      out.push_back("crusher initial volume must list every material");
    } else {
      double sum = 0.0;
      for (double v : c.initial_volume) {
        if (v < 0.0) out.push_back("crusher initial volume negative");
        sum += v;
      }
      if (sum > c.capacity) out.push_back("crusher initial volume exceeds capacity");
    }
    for (const auto& r : c.ratio_targets) {
      if (!(r.share > 0.0)) out.push_back("ratio target must be > 0");
      if (r.material >= config.materials.size()) out.push_back("ratio target material unknown");
    }
  }

  for (const auto& spec : config.constraints) {
    switch (spec.kind) {
      case ConstraintKind::battery: {
        const auto& m = std::get<BatteryModel>(spec.params);
        if (m.min_level < 0.0 || m.min_level >= 100.0) out.push_back("battery B_min must be in [0,100)");
        if (!(m.charge_rate > 0.0)) out.push_back("battery k_charge must be > 0");
        for (auto k : m.discharge_rate) {
          if (k > 0.0) out.push_back("battery discharge rates must be <= 0");
        }
        if (m.charge_queue_rate > 0.0) out.push_back("battery discharge rates must be <= 0");
        if (auto c = config.first_location_of(LocationKind::charging_bay)) {
          used.insert(*c);
        } else {
          out.push_back("battery constraint requires a charging-bay location");
        }
        break;
      }
      case ConstraintKind::tyre: {
        const auto& m = std::get<TyreModel>(spec.params);
        if (!(m.ambient < m.soft_threshold && m.soft_threshold <= m.hard_limit && m.hard_limit <= m.range_max)) {
          out.push_back("tyre thresholds must satisfy ambient < Y_Th <= Y_max <= 95");
        }
        if (!(m.heating_rate > 0.0) || !(m.cooling_rate > 0.0)) out.push_back("tyre k_h and k_c must be > 0");
        if (!(m.park_target > m.ambient)) out.push_back("tyre park target must exceed ambient");
        if (m.delay_scale < 0.0) out.push_back("tyre K must be >= 0");
        if (auto p = config.first_location_of(LocationKind::parking_bay)) {
          used.insert(*p);
        } else {
          out.push_back("tyre constraint requires a parking-bay location");
        }
        break;
      }
      case ConstraintKind::capacity: {
        const auto& lim = std::get<CapacityLimit>(spec.params);
        if (!config.crusher_at(lim.crusher)) out.push_back("capacity constraint location has no crusher");
        break;
      }
      case ConstraintKind::ratio: {
        const auto& lim = std::get<RatioLimit>(spec.params);
        if (!config.crusher_at(lim.crusher)) out.push_back("ratio constraint location has no crusher");
        if (lim.targets.empty()) out.push_back("ratio constraint has no targets");
        break;
      }
    }
  }

  for (LocationIndex a : used) {
    for (LocationIndex b : used) {
      if (net.shortest(a, b) == kNever) {
        out.push_back("road network not strongly connected: no path " + loc_name(a) + " -> " + loc_name(b));
      }
    }
  }
  return report;
}

}  // namespace dispatch
