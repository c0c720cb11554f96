#include "minedispatch/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dispatch {

std::string_view to_string(ActivityType type) {
  switch (type) {
    case ActivityType::transit: return "transit";
    case ActivityType::load: return "load";
    case ActivityType::queue: return "queue";
    case ActivityType::unload: return "unload";
    case ActivityType::charge: return "charge";
    case ActivityType::park: return "park";
  }
  return "?";
}

std::optional<ActivityType> parse_activity_type(std::string_view name) {
  for (auto t : kActivityTypes) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

std::string_view to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::battery: return "battery";
    case ConstraintKind::tyre: return "tyre";
    case ConstraintKind::capacity: return "capacity";
    case ConstraintKind::ratio: return "ratio";
  }
  return "?";
}

std::optional<ConstraintKind> parse_constraint_kind(std::string_view name) {
  for (auto k : {ConstraintKind::battery, ConstraintKind::tyre, ConstraintKind::capacity, ConstraintKind::ratio}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

ConstraintSpec ConstraintSpec::battery(BatteryModel model) {
  return {ConstraintKind::battery, Flexibility::hard, Specificity::per_vehicle, model};
}

ConstraintSpec ConstraintSpec::tyre(TyreModel model) {
  return {ConstraintKind::tyre, Flexibility::soft, Specificity::per_vehicle, model};
}

ConstraintSpec ConstraintSpec::capacity(CapacityLimit limit) {
  return {ConstraintKind::capacity, Flexibility::hard, Specificity::collective, limit};
}

ConstraintSpec ConstraintSpec::ratio(RatioLimit limit) {
  return {ConstraintKind::ratio, Flexibility::soft, Specificity::collective, std::move(limit)};
}

double CrusherBin::total() const { return std::accumulate(volumes.begin(), volumes.end(), 0.0); }

// ---------------------------------------------------------------------------

double update_battery(double level, ActivityType type, Seconds duration, const BatteryModel& model) {
  const double rate = type == ActivityType::charge ? model.charge_rate : model.rate(type);
  return std::clamp(level + rate * to_hours(duration), 0.0, 100.0);
}

Seconds charge_duration(double level, const BatteryModel& model) {
  return hours(std::max(0.0, 100.0 - level) / model.charge_rate);
}

double update_tyre_temperature(double temp, ActivityType type, Seconds duration, const TyreModel& model) {
  if (type == ActivityType::transit) return temp + model.heating_rate * to_hours(duration);
  const double decay = std::exp(-model.cooling_rate * to_hours(duration));
  if (model.literal_cooling) return model.ambient + temp * decay;
  return model.ambient + (temp - model.ambient) * decay;
}

Seconds park_cooldown_duration(double temp, double target, const TyreModel& model) {
  if (target <= model.ambient) throw std::domain_error("park target temperature must exceed ambient");
  if (target > temp) throw std::domain_error("park target temperature above current temperature");
  return hours(std::log((temp - model.ambient) / (target - model.ambient)) / model.cooling_rate);
}

ViolationDelay tyre_violation_delay(double temp, ActivityType type, Seconds duration, const TyreModel& model) {
  if (type == ActivityType::transit && temp > model.soft_threshold) {
    return ViolationDelay::finite(model.delay_scale * duration);
  }
  return ViolationDelay::none();
}

// ---------------------------------------------------------------------------

std::vector<double> ratio_errors(const CrusherBin& bin) {
  const CrusherModel& m = *bin.model;
  const double denom = m.normalization == RatioNormalization::capacity ? m.capacity : bin.total();
  std::vector<double> errors;
  errors.reserve(m.ratio_targets.size());
  for (const auto& target : m.ratio_targets) {
    const double r = denom > 0.0 ? bin.volumes[target.material] / denom : 0.0;
    errors.push_back(std::abs((r - target.share) / target.share));
  }
  return errors;
}

double max_ratio_error(const CrusherBin& bin) {
  const CrusherModel& m = *bin.model;
  const double denom = m.normalization == RatioNormalization::capacity ? m.capacity : bin.total();
  double worst = 0.0;
  for (const auto& target : m.ratio_targets) {
    const double r = denom > 0.0 ? bin.volumes[target.material] / denom : 0.0;
    worst = std::max(worst, std::abs((r - target.share) / target.share));
  }
  return worst;
}

double crusher_rate(const CrusherBin& bin, bool ratio_active) {
  const double p = bin.model->processing_rate;
  if (!ratio_active || bin.model->ratio_targets.empty()) return p;
  return p * std::exp(-max_ratio_error(bin));
}

void crusher_advance(CrusherBin& bin, Seconds duration, bool ratio_active) {
  if (duration <= 0.0) return;
  const double total = bin.total();
  if (total <= 0.0) return;
  const double drained = std::min(total, crusher_rate(bin, ratio_active) * to_hours(duration));
  bin.processed += drained;
  if (drained >= total) {
    std::fill(bin.volumes.begin(), bin.volumes.end(), 0.0);
    return;
  }
  const double keep = 1.0 - drained / total;
  for (auto& v : bin.volumes) v *= keep;
}

ViolationDelay ratio_queue_delay(double truck_capacity, const CrusherBin& bin) {
  const CrusherModel& m = *bin.model;
  const double overflow = truck_capacity + bin.total() - m.capacity;
  if (overflow <= 0.0) return ViolationDelay::none();
  const double factor = std::exp(max_ratio_error(bin)) - 1.0;
  return ViolationDelay::finite(hours(overflow * factor / m.processing_rate));
}

// ---------------------------------------------------------------------------

ViolationDelay violation_delay(const ConstraintSpec& spec, const ViolationContext& ctx) {
  switch (spec.kind) {
    case ConstraintKind::battery: {
      const auto& model = std::get<BatteryModel>(spec.params);
      return ctx.battery < model.min_level ? ViolationDelay::unbounded() : ViolationDelay::none();
    }
    case ConstraintKind::tyre:
      return tyre_violation_delay(ctx.tyre, ctx.activity, ctx.duration, std::get<TyreModel>(spec.params));
    case ConstraintKind::capacity: {
      const auto& limit = std::get<CapacityLimit>(spec.params);
      if (ctx.activity != ActivityType::unload || ctx.location != limit.crusher || ctx.bin == nullptr) {
        return ViolationDelay::none();
      }
      return ctx.bin->total() <= limit.min_volume ? ViolationDelay::unbounded() : ViolationDelay::none();
    }
    case ConstraintKind::ratio: {
      const auto& limit = std::get<RatioLimit>(spec.params);
      if (ctx.activity != ActivityType::queue || ctx.location != limit.crusher || ctx.bin == nullptr) {
        return ViolationDelay::none();
      }
      return ratio_queue_delay(ctx.truck_capacity, *ctx.bin);
    }
  }
  throw std::invalid_argument("unknown constraint kind");
}

double constraint_action_probability(const ConstraintSpec& spec, double battery, double tyre) {
  switch (spec.kind) {
    case ConstraintKind::battery: {
      const auto& m = std::get<BatteryModel>(spec.params);
      return std::clamp((100.0 - battery) / (100.0 - m.min_level), 0.0, 1.0);
    }
    case ConstraintKind::tyre: {
      const auto& m = std::get<TyreModel>(spec.params);
      return std::clamp((tyre - m.ambient) / (m.soft_threshold - m.ambient), 0.0, 1.0);
    }
    case ConstraintKind::capacity:
    case ConstraintKind::ratio:
      return 0.0;
  }
  return 0.0;
}

}  // namespace dispatch
