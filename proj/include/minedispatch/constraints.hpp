#pragma once

#include <span>
#include <variant>
#include <vector>

#include "minedispatch/types.hpp"

namespace dispatch {

// ---------------------------------------------------------------------------
// Constraint specifications
// ---------------------------------------------------------------------------

enum class ConstraintKind : std::uint8_t { battery, tyre, capacity, ratio };
enum class Flexibility : std::uint8_t { hard, soft };
enum class Specificity : std::uint8_t { per_vehicle, collective };

std::string_view to_string(ConstraintKind kind);
std::optional<ConstraintKind> parse_constraint_kind(std::string_view name);

/// Linear battery model. Rates are percent per hour; discharge rates are <= 0.
struct BatteryModel {
  double min_level = 10.0;
  double charge_rate = 25.0;
  std::array<double, 6> discharge_rate = {-30.0, -15.0, -5.0, -15.0, 0.0, 0.0};
  // Waiting at the charging bay (plugged in).
  double charge_queue_rate = 0.0;

  double rate(ActivityType type) const { return discharge_rate[static_cast<std::size_t>(type)]; }
};

/// Tyre temperature model: linear heating in transit, exponential cooling otherwise.
struct TyreModel {
  double ambient = 35.0;
  double range_max = 95.0;
  double soft_threshold = 80.0;  // Y_Th
  double hard_limit = 90.0;      // Y_max, only enforced by the heuristic baseline
  double heating_rate = 20.0;    // degC per hour of transit
  double cooling_rate = 0.5;     // 1/hour
  double delay_scale = 1.0;      // K
  double park_target = 55.0;     // y_final
  Seconds min_park_duration = 600.0;
  // Use the printed cooling form ambient + y e^{-k d} instead of the continuous one.
  bool literal_cooling = false;
};

struct CapacityLimit {
  LocationIndex crusher = kNoIndex;
  double min_volume = 0.0;  // V_min, tonnes
};

enum class RatioNormalization : std::uint8_t { capacity, current_total };

struct RatioTarget {
  MaterialIndex material = kNoIndex;
  double share = 0.0;  // r*
};

struct RatioLimit {
  LocationIndex crusher = kNoIndex;
  std::vector<RatioTarget> targets;
  RatioNormalization normalization = RatioNormalization::capacity;
};

struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::battery;
  Flexibility flexibility = Flexibility::hard;
  Specificity specificity = Specificity::per_vehicle;
  std::variant<BatteryModel, TyreModel, CapacityLimit, RatioLimit> params;

  static ConstraintSpec battery(BatteryModel model);
  static ConstraintSpec tyre(TyreModel model);
  static ConstraintSpec capacity(CapacityLimit limit);
  static ConstraintSpec ratio(RatioLimit limit);
};

/// Bit set of constraint families modelled by a simulation state.
class ConstraintSet {
 public:
  constexpr ConstraintSet() = default;
  constexpr ConstraintSet(std::initializer_list<ConstraintKind> kinds) {
    for (auto k : kinds) insert(k);
  }
  constexpr void insert(ConstraintKind k) { bits_ |= bit(k); }
  constexpr void erase(ConstraintKind k) { bits_ &= static_cast<std::uint8_t>(~bit(k)); }
  constexpr bool contains(ConstraintKind k) const { return (bits_ & bit(k)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool operator==(const ConstraintSet&) const = default;

 private:
  static constexpr std::uint8_t bit(ConstraintKind k) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(k));
  }
  std::uint8_t bits_ = 0;
};

// ---------------------------------------------------------------------------
// Crusher bin
// ---------------------------------------------------------------------------

/// Physical crusher parameters merged with its capacity/ratio limits.
struct CrusherModel {
  LocationIndex location = kNoIndex;
  double capacity = 400.0;          // V_max, tonnes
  double processing_rate = 300.0;   // p, tonnes per hour
  double min_volume = 0.0;          // V_min, tonnes
  std::vector<RatioTarget> ratio_targets;
  RatioNormalization normalization = RatioNormalization::capacity;
  std::vector<double> initial_volume;  // per material index
};

/// Per-material bin content of one crusher. The model pointer refers to
/// immutable scenario data that outlives every state.
struct CrusherBin {
  const CrusherModel* model = nullptr;
  std::vector<double> volumes;
  double processed = 0.0;  // tonnes drained since the start

  double total() const;
};

/// Violation delay: seconds, or infinite for hard-constraint violations.
struct ViolationDelay {
  Seconds seconds = 0.0;
  bool infinite = false;

  static constexpr ViolationDelay none() { return {}; }
  static constexpr ViolationDelay finite(Seconds s) { return {s, false}; }
  static constexpr ViolationDelay unbounded() { return {0.0, true}; }
  bool is_zero() const { return !infinite && seconds == 0.0; }
};

// ---------------------------------------------------------------------------
// Model dynamics
// ---------------------------------------------------------------------------

/// b' = clamp(b + k d, 0, 100) with k the charge rate for charge activities.
double update_battery(double level, ActivityType type, Seconds duration, const BatteryModel& model);

/// Time to charge from `level` to 100 %.
Seconds charge_duration(double level, const BatteryModel& model);

double update_tyre_temperature(double temp, ActivityType type, Seconds duration, const TyreModel& model);

/// Inverse of the cooling model. Throws std::domain_error if target <= ambient
/// or target > temp.
Seconds park_cooldown_duration(double temp, double target, const TyreModel& model);

ViolationDelay tyre_violation_delay(double temp, ActivityType type, Seconds duration, const TyreModel& model);

/// Effective drain rate in tonnes per hour.
double crusher_rate(const CrusherBin& bin, bool ratio_active);

/// Drains the bin by rate * duration (floored at zero), removing material in
/// proportion to the current composition.
void crusher_advance(CrusherBin& bin, Seconds duration, bool ratio_active);

/// Relative ratio error per ratio target, in target order.
std::vector<double> ratio_errors(const CrusherBin& bin);
double max_ratio_error(const CrusherBin& bin);

/// Extra wait at the head of the crusher queue caused by the degraded
/// processing rate, for a truck carrying `truck_capacity` tonnes.
ViolationDelay ratio_queue_delay(double truck_capacity, const CrusherBin& bin);

/// What the constraint needs to know about the activity that may violate it.
struct ViolationContext {
  ActivityType activity = ActivityType::transit;
  LocationIndex location = kNoIndex;
  Seconds duration = 0.0;          // d_alpha
  double battery = 100.0;          // level after the activity
  double tyre = 35.0;              // temperature at the start of the activity
  double truck_capacity = 0.0;
  const CrusherBin* bin = nullptr;  // bin at the activity location, if any
};

ViolationDelay violation_delay(const ConstraintSpec& spec, const ViolationContext& ctx);

/// Probability of choosing the constraint action (charge for battery, park for
/// tyre) in a rollout. Zero for constraints without actions.
double constraint_action_probability(const ConstraintSpec& spec, double battery, double tyre);

}  // namespace dispatch
