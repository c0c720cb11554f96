#pragma once

#include <string>
#include <vector>

#include "minedispatch/constraints.hpp"
#include "minedispatch/types.hpp"

namespace dispatch {

enum class MaterialKind : std::uint8_t { ore_grade, waste };
enum class LocationKind : std::uint8_t { loading_station, unloading_station, charging_bay, parking_bay };

std::string_view to_string(LocationKind kind);
std::optional<LocationKind> parse_location_kind(std::string_view name);

struct Material {
  std::string id;
  MaterialKind kind = MaterialKind::ore_grade;
};

struct Location {
  std::string id;
  LocationKind kind = LocationKind::loading_station;
};

struct Edge {
  LocationIndex from = kNoIndex;
  LocationIndex to = kNoIndex;
  Seconds weight = 0.0;
};

/// Directed road graph with all-pairs shortest transit times.
class RoadNetwork {
 public:
  RoadNetwork() = default;
  RoadNetwork(std::vector<Location> locations, std::vector<Edge> edges);

  const std::vector<Location>& locations() const { return locations_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t size() const { return locations_.size(); }

  std::optional<LocationIndex> find(std::string_view id) const;
  const Location& location(LocationIndex i) const { return locations_.at(i); }

  /// Shortest-path time, kNever if no path. No bounds checks.
  Seconds shortest(LocationIndex from, LocationIndex to) const {
    return distance_[static_cast<std::size_t>(from) * locations_.size() + to];
  }

 private:
  std::vector<Location> locations_;
  std::vector<Edge> edges_;
  std::vector<Seconds> distance_;
};

/// Minimal transit time between two locations. Throws UnreachableError when
/// no path exists and std::out_of_range for unknown locations.
Seconds transit_duration(const RoadNetwork& network, LocationIndex from, LocationIndex to);

struct Truck {
  std::string id;
  double capacity = 100.0;        // tonnes
  double initial_battery = 100.0; // percent
  double initial_tyre = 35.0;     // degC
  LocationIndex start = kNoIndex;
};

struct HaulageTask {
  std::string id;
  LocationIndex source = kNoIndex;
  LocationIndex destination = kNoIndex;
  MaterialIndex material = kNoIndex;
  double target_rate = 0.0;  // tonnes per hour
};

struct Activity {
  LocationIndex location = kNoIndex;
  ActivityType type = ActivityType::load;
  Seconds nominal_duration = 0.0;
};

/// Nominal activity durations keyed by (location, type). Load and unload
/// entries that are absent fall back to capacity / handling rate.
class ActivityCatalogue {
 public:
  void set(Activity activity);
  std::optional<Seconds> find(LocationIndex location, ActivityType type) const;
  const std::vector<Activity>& entries() const { return entries_; }

 private:
  std::vector<Activity> entries_;
};

/// Physical interaction parameters of the mine.
struct InteractionModel {
  int charging_stations = 2;
  double loader_rate = 600.0;    // tonnes per hour
  double unloader_rate = 600.0;  // tonnes per hour
  Seconds break_length = 1800.0; // park duration when no tyre model applies
  std::vector<CrusherModel> crushers;
};

struct MineConfig {
  std::vector<Material> materials;
  RoadNetwork network;
  std::vector<Truck> trucks;
  std::vector<HaulageTask> tasks;
  ActivityCatalogue activities;
  std::vector<ConstraintSpec> constraints;
  InteractionModel interaction;

  std::optional<MaterialIndex> find_material(std::string_view id) const;
  std::optional<TaskIndex> find_task(std::string_view id) const;
  std::optional<LocationIndex> first_location_of(LocationKind kind) const;
  const CrusherModel* crusher_at(LocationIndex location) const;
  const ConstraintSpec* constraint(ConstraintKind kind) const;
  const BatteryModel* battery_model() const;
  const TyreModel* tyre_model() const;

  /// Nominal duration of load/unload/charge-setup for a given truck.
  Seconds nominal_duration(LocationIndex location, ActivityType type, const Truck& truck) const;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  bool contains(std::string_view fragment) const;
};

ValidationReport validate_scenario(const MineConfig& config);

}  // namespace dispatch
