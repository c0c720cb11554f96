#include "minedispatch/sim_engine.hpp"

#include <algorithm>
#include <cmath>

namespace dispatch {

namespace {

// Volumes below this are treated as an empty bin (floating residue of drains).
constexpr double kEmptyBin = 1e-9;
constexpr double kRoomTolerance = 1e-7;

}  // namespace

std::string action_label(const Action& action, const MineConfig& config) {
  switch (action.kind) {
    case ActionKind::task: return config.tasks.at(action.task).id;
    case ActionKind::charge: return "charge";
    case ActionKind::park: return "park";
  }
  return "?";
}

std::optional<Action> parse_action(std::string_view label, const MineConfig& config) {
  if (label == "charge") return Action::charge();
  if (label == "park") return Action::park();
  if (auto t = config.find_task(label)) return Action::haul(*t);
  return std::nullopt;
}

std::vector<PlannedActivity> expand_action(const MineConfig& config, LocationIndex from, Action action) {
  (void)from;
  switch (action.kind) {
    case ActionKind::task: {
      if (action.task >= config.tasks.size()) throw std::invalid_argument("action references unknown task");
      const auto& task = config.tasks[action.task];
      if (task.source >= config.network.size() || task.destination >= config.network.size()) {
        throw std::invalid_argument("task '" + task.id + "' references unknown location");
      }
      return {{ActivityType::transit, task.source},      {ActivityType::queue, task.source},
              {ActivityType::load, task.source},         {ActivityType::transit, task.destination},
              {ActivityType::queue, task.destination},   {ActivityType::unload, task.destination}};
    }
    case ActionKind::charge: {
      auto bay = config.first_location_of(LocationKind::charging_bay);
      if (!bay) throw std::invalid_argument("charge action without a charging bay");
      return {{ActivityType::transit, *bay}, {ActivityType::queue, *bay}, {ActivityType::charge, *bay}};
    }
    case ActionKind::park: {
      auto bay = config.first_location_of(LocationKind::parking_bay);
      if (!bay) throw std::invalid_argument("park action without a parking bay");
      return {{ActivityType::transit, *bay}, {ActivityType::park, *bay}};
    }
  }
  throw std::invalid_argument("unknown action kind");
}

// ---------------------------------------------------------------------------

SimState::SimState(const MineConfig& config, SimOptions options) : config_(&config), options_(options) {
  const auto& locs = config.network.locations();
  stations_.resize(locs.size());
  for (std::size_t i = 0; i < locs.size(); ++i) {
    auto& st = stations_[i];
    st.location = static_cast<LocationIndex>(i);
    switch (locs[i].kind) {
      case LocationKind::loading_station:
      case LocationKind::unloading_station: st.servers = 1; break;
      case LocationKind::charging_bay:
        st.servers = static_cast<std::uint8_t>(std::clamp(config.interaction.charging_stations, 1, 255));
        break;
      case LocationKind::parking_bay: st.servers = 0; break;
    }
  }
  for (const auto& model : config.interaction.crushers) {
    CrusherBin bin{&model, model.initial_volume, 0.0};
    bin.volumes.resize(config.materials.size(), 0.0);
    if (model.location < stations_.size()) stations_[model.location].crusher = static_cast<std::int16_t>(crushers_.size());
    crushers_.push_back(std::move(bin));
  }
  trucks_.reserve(config.trucks.size());
  for (std::size_t i = 0; i < config.trucks.size(); ++i) {
    const auto& spec = config.trucks[i];
    TruckState t;
    t.id = static_cast<TruckIndex>(i);
    t.location = spec.start;
    t.battery = t.battery_at_start = spec.initial_battery;
    t.tyre = t.tyre_at_start = spec.initial_tyre;
    trucks_.push_back(t);
  }
}

const CrusherBin* SimState::crusher_at(LocationIndex location) const {
  if (location >= stations_.size() || stations_[location].crusher < 0) return nullptr;
  return &crushers_[static_cast<std::size_t>(stations_[location].crusher)];
}

std::vector<TruckIndex> SimState::station_queue(LocationIndex location) const {
  std::vector<TruckIndex> queue;
  for (const auto& t : trucks_) {
    if (t.station == location && !t.in_service && !t.disabled) queue.push_back(t.id);
  }
  std::sort(queue.begin(), queue.end(),
            [&](TruckIndex a, TruckIndex b) { return trucks_[a].queue_seq < trucks_[b].queue_seq; });
  return queue;
}

void SimState::prepare_for_planning() {
  flow_log_.compact();
  trace_.clear();
  trace_.shrink_to_fit();
  options_.record_trace = false;
}

void SimState::set_battery(TruckIndex i, double level) {
  auto& t = trucks_.at(i);
  t.battery = t.battery_at_start = level;
}

void SimState::set_tyre(TruckIndex i, double temp) {
  auto& t = trucks_.at(i);
  t.tyre = t.tyre_at_start = temp;
}

void SimState::set_bin_volumes(std::size_t crusher, std::vector<double> volumes) {
  auto& bin = crushers_.at(crusher);
  volumes.resize(bin.volumes.size(), 0.0);
  bin.volumes = std::move(volumes);
}

void SimState::close_trace(Seconds end) {
  if (!options_.record_trace) return;
  for (const auto& t : trucks_) {
    if (t.disabled || t.awaiting_decision || t.activity_start >= end) continue;
    record(t, end, 0.0, true);
  }
  options_.record_trace = false;
}

void SimState::record(const TruckState& t, Seconds end, double delivered, bool truncated) {
  if (!options_.record_trace) return;
  ActivityRecord r;
  r.truck = t.id;
  r.type = t.activity;
  r.location = t.location;
  r.start = t.activity_start;
  r.end = end;
  r.nominal = t.activity_nominal;
  r.delay = t.activity_delay.seconds;
  r.infinite_delay = t.activity_delay.infinite;
  r.battery_start = t.battery_at_start;
  r.battery_end = t.battery;
  r.tyre_start = t.tyre_at_start;
  r.tyre_end = t.tyre;
  r.delivered = delivered;
  r.decision = t.decision;
  r.truncated = truncated;
  trace_.push_back(r);
}

// ---------------------------------------------------------------------------

void SimState::start_next_activity(TruckIndex i) {
  auto& t = trucks_[i];
  if (t.disabled) return;
  if (!t.has_pending()) {
    t.awaiting_decision = true;
    t.assignment.reset();
    return;
  }
  const PlannedActivity next = t.next_pending();
  t.pending_head = static_cast<std::uint8_t>(t.pending_head + 1);
  t.pending_count = static_cast<std::uint8_t>(t.pending_count - 1);

  t.activity = next.type;
  t.activity_start = clock_;
  t.activity_delay = ViolationDelay::none();
  t.battery_at_start = t.battery;
  t.tyre_at_start = t.tyre;
  const Truck& spec = config_->trucks[i];

  switch (next.type) {
    case ActivityType::transit: {
      const Seconds d = transit_duration(config_->network, t.location, next.location);
      t.activity_nominal = d;
      if (modelled(ConstraintKind::tyre)) {
        if (const auto* tyre = config_->tyre_model()) {
          t.activity_delay = tyre_violation_delay(t.tyre, ActivityType::transit, d, *tyre);
          if (!t.activity_delay.is_zero()) ++violations_[static_cast<std::size_t>(ConstraintKind::tyre)];
        }
      }
      t.location = next.location;
      t.activity_end = clock_ + d + t.activity_delay.seconds;
      break;
    }
    case ActivityType::queue: {
      t.location = next.location;
      t.activity_nominal = 0.0;
      if (stations_[next.location].servers == 0) {
        t.activity_end = clock_;
        break;
      }
      t.station = next.location;
      t.queue_seq = next_queue_seq_++;
      t.in_service = false;
      t.held = false;
      t.activity_end = kNever;
      try_serve(next.location);
      return;
    }
    case ActivityType::load:
    case ActivityType::unload: {
      t.location = next.location;
      t.activity_nominal = config_->nominal_duration(next.location, next.type, spec);
      if (next.type == ActivityType::unload && modelled(ConstraintKind::capacity)) {
        if (const CrusherBin* bin = crusher_at(next.location)) {
          if (bin->model->min_volume > 0.0 && bin->total() <= bin->model->min_volume) {
            t.activity_delay = ViolationDelay::unbounded();
            disable(i, ConstraintKind::capacity);
            return;
          }
        }
      }
      t.activity_end = clock_ + t.activity_nominal;
      break;
    }
    case ActivityType::charge: {
      t.location = next.location;
      const auto* battery = config_->battery_model();
      t.activity_nominal = battery ? charge_duration(t.battery, *battery) : 0.0;
      t.activity_end = clock_ + t.activity_nominal;
      break;
    }
    case ActivityType::park: {
      t.location = next.location;
      Seconds d = config_->interaction.break_length;
      if (modelled(ConstraintKind::tyre)) {
        if (const auto* tyre = config_->tyre_model()) {
          d = tyre->min_park_duration;
          if (t.tyre > tyre->park_target) d = std::max(d, park_cooldown_duration(t.tyre, tyre->park_target, *tyre));
        }
      }
      t.activity_nominal = d;
      t.activity_end = clock_ + d;
      break;
    }
  }
  if (t.activity_end <= clock_) complete_activity(i);
}

Seconds SimState::crusher_room_wait(const TruckState& t, const CrusherBin& bin) const {
  const double cap = bin.model->capacity;
  if (t.load_tonnes > cap) return 0.0;
  const double overflow = t.load_tonnes + bin.total() - cap;
  if (overflow <= kRoomTolerance) return 0.0;
  const double rate = crusher_rate(bin, modelled(ConstraintKind::ratio));
  return hours(overflow / rate);
}

void SimState::try_serve(LocationIndex location) {
  auto& st = stations_[location];
  if (st.servers == 0) return;
  CrusherBin* bin = st.crusher >= 0 ? &crushers_[static_cast<std::size_t>(st.crusher)] : nullptr;
  while (st.busy < st.servers) {
    TruckIndex head = kNoIndex;
    bool any_held = false;
    std::uint32_t best_seq = 0;
    for (auto& t : trucks_) {
      if (t.station != location || t.in_service || t.disabled) continue;
      if (head != kNoIndex && t.queue_seq >= best_seq) continue;
      if (bin != nullptr && options_.admission != nullptr && t.activity_end == kNever) {
        t.held = !options_.admission(*this, t.id);
        if (t.held) {
          any_held = true;
          continue;
        }
      }
      head = t.id;
      best_seq = t.queue_seq;
    }
    if (head == kNoIndex) {
      const double total = bin != nullptr ? bin->total() : 0.0;
      if (any_held && total > kEmptyBin) {
        st.wakeup = clock_ + hours(total / crusher_rate(*bin, modelled(ConstraintKind::ratio)));
      }
      return;
    }
    auto& h = trucks_[head];
    if (bin != nullptr && h.pending_count > 0 && h.next_pending().type == ActivityType::unload) {
      if (h.activity_end != kNever) return;  // already blocked until its room timer fires
      const Seconds wait = crusher_room_wait(h, *bin);
      if (wait > 0.0) {
        if (modelled(ConstraintKind::ratio) && !bin->model->ratio_targets.empty()) {
          const double overflow = h.load_tonnes + bin->total() - bin->model->capacity;
          const Seconds nominal_wait = hours(overflow / bin->model->processing_rate);
          if (wait > nominal_wait) {
            if (h.activity_delay.seconds == 0.0) ++violations_[static_cast<std::size_t>(ConstraintKind::ratio)];
            h.activity_delay.seconds += wait - nominal_wait;
          }
        }
        h.activity_end = clock_ + wait;
        return;
      }
    }
    begin_service(head);
  }
}

void SimState::begin_service(TruckIndex i) {
  auto& t = trucks_[i];
  auto& st = stations_[t.station];
  t.in_service = true;
  t.held = false;
  ++st.busy;
  t.activity_end = clock_;
  complete_activity(i);
}

void SimState::release_server(TruckState& t) {
  if (t.station == kNoIndex) return;
  const LocationIndex loc = t.station;
  if (t.in_service) --stations_[loc].busy;
  t.in_service = false;
  t.held = false;
  t.station = kNoIndex;
  try_serve(loc);
}

void SimState::disable(TruckIndex i, ConstraintKind cause) {
  auto& t = trucks_[i];
  ++violations_[static_cast<std::size_t>(cause)];
  t.activity_delay = ViolationDelay::unbounded();
  record(t, clock_, 0.0, false);
  t.disabled = true;
  t.awaiting_decision = false;
  t.pending_count = 0;
  t.activity_end = kNever;
  outages_.push_back({t.id, clock_});
  release_server(t);
}

void SimState::complete_activity(TruckIndex i) {
  auto& t = trucks_[i];
  const Seconds duration = clock_ - t.activity_start;
  t.activity_end = clock_;

  if (modelled(ConstraintKind::battery)) {
    if (const auto* model = config_->battery_model()) {
      if (t.activity == ActivityType::charge) {
        t.battery = 100.0;
      } else if (t.activity == ActivityType::queue &&
                 config_->network.location(t.location).kind == LocationKind::charging_bay) {
        t.battery = std::clamp(t.battery + model->charge_queue_rate * to_hours(duration), 0.0, 100.0);
      } else {
        t.battery = update_battery(t.battery, t.activity, duration, *model);
      }
      if (t.battery < model->min_level) {
        disable(i, ConstraintKind::battery);
        return;
      }
    }
  }
  if (modelled(ConstraintKind::tyre)) {
    if (const auto* model = config_->tyre_model()) {
      const Seconds d = t.activity == ActivityType::transit ? t.activity_nominal : duration;
      t.tyre = update_tyre_temperature(t.tyre, t.activity, d, *model);
    }
  }

  double delivered = 0.0;
  const bool releases = t.activity == ActivityType::load || t.activity == ActivityType::unload ||
                        t.activity == ActivityType::charge;
  if (t.activity == ActivityType::load) {
    const auto& task = config_->tasks[t.assignment->task];
    t.load_material = task.material;
    t.load_source = t.location;
    t.load_tonnes = config_->trucks[i].capacity;
    loaded_tonnes_ += t.load_tonnes;
  } else if (t.activity == ActivityType::unload && t.load_tonnes > 0.0) {
    delivered = t.load_tonnes;
    if (CrusherBin* bin = stations_[t.location].crusher >= 0
                              ? &crushers_[static_cast<std::size_t>(stations_[t.location].crusher)]
                              : nullptr) {
      if (t.load_material < bin->volumes.size()) bin->volumes[t.load_material] += delivered;
    }
    flow_log_.append({clock_, t.load_source, t.location, t.load_material, delivered, t.id});
    t.load_material = kNoIndex;
    t.load_source = kNoIndex;
    t.load_tonnes = 0.0;
  }
  record(t, clock_, delivered, false);
  ++activities_completed_;
  if (releases) release_server(t);
  start_next_activity(i);
}

void SimState::on_truck_event(TruckIndex i) {
  auto& t = trucks_[i];
  if (t.activity == ActivityType::queue && t.station != kNoIndex && !t.in_service) {
    // Room timer at the head of a crusher queue.
    t.activity_end = kNever;
    try_serve(t.station);
    return;
  }
  complete_activity(i);
}

// ---------------------------------------------------------------------------

std::optional<DecisionPoint> next_decision_point(const SimState& state) {
  std::optional<DecisionPoint> best;
  for (const auto& t : state.trucks()) {
    if (t.disabled || t.activity_end == kNever) continue;
    if (!best || t.activity_end < best->time) best = DecisionPoint{t.id, t.activity_end};
  }
  return best;
}

void step_stations(SimState& state, Seconds to_time) {
  if (to_time < state.clock_) throw std::invalid_argument("step_stations cannot move the clock backwards");
  const Seconds dt = to_time - state.clock_;
  if (dt > 0.0) {
    const bool ratio = state.modelled(ConstraintKind::ratio);
    for (auto& bin : state.crushers_) {
      crusher_advance(bin, dt, ratio);
      if (bin.total() <= kEmptyBin) {
        for (auto& v : bin.volumes) {
          bin.processed += v;
          v = 0.0;
        }
      }
    }
  }
  state.clock_ = to_time;
}

std::optional<DecisionPoint> advance_to_decision(SimState& state, Seconds limit) {
  for (;;) {
    std::optional<DecisionPoint> ready;
    for (const auto& t : state.trucks_) {
      if (!t.awaiting_decision || t.disabled || t.activity_end >= limit) continue;
      if (!ready || t.activity_end < ready->time) ready = DecisionPoint{t.id, t.activity_end};
    }
    if (ready) return ready;

    Seconds next = kNever;
    TruckIndex truck = kNoIndex;
    for (const auto& t : state.trucks_) {
      if (t.awaiting_decision || t.disabled) continue;
      if (t.activity_end < next) {
        next = t.activity_end;
        truck = t.id;
      }
    }
    LocationIndex station = kNoIndex;
    for (const auto& st : state.stations_) {
      if (st.wakeup < next) {
        next = st.wakeup;
        station = st.location;
        truck = kNoIndex;
      }
    }
    if (next == kNever || next > limit) {
      if (limit != kNever) step_stations(state, std::max(limit, state.clock_));
      return std::nullopt;
    }
    step_stations(state, std::max(next, state.clock_));
    if (truck != kNoIndex) {
      state.on_truck_event(truck);
    } else {
      state.stations_[station].wakeup = kNever;
      state.try_serve(station);
    }
  }
}

void apply_decision(SimState& state, TruckIndex truck, Action action) {
  auto& t = state.trucks_.at(truck);
  if (t.disabled || !t.awaiting_decision) throw std::logic_error("truck is not at a decision point");
  const auto plan = expand_action(state.config(), t.location, action);
  for (std::size_t k = 0; k < plan.size(); ++k) t.pending[k] = plan[k];
  t.pending_head = 0;
  t.pending_count = static_cast<std::uint8_t>(plan.size());
  t.assignment = action;
  t.awaiting_decision = false;
  t.decision = state.decisions_++;
  state.start_next_activity(truck);
}

ActivityForecast activity_duration(const SimState& state, TruckIndex truck, const PlannedActivity& activity) {
  const auto& config = state.config();
  const auto& t = state.truck(truck);
  ActivityForecast f;
  switch (activity.type) {
    case ActivityType::transit:
      f.duration = transit_duration(config.network, t.location, activity.location);
      return f;
    case ActivityType::park:
      f.duration = config.interaction.break_length;
      if (state.options().constraints.contains(ConstraintKind::tyre)) {
        if (const auto* tyre = config.tyre_model()) {
          f.duration = tyre->min_park_duration;
          if (t.tyre > tyre->park_target) {
            f.duration = std::max(f.duration, park_cooldown_duration(t.tyre, tyre->park_target, *tyre));
          }
        }
      }
      return f;
    default: break;
  }

  const auto* battery = config.battery_model();
  auto service_time = [&](const TruckState& other, ActivityType type) -> Seconds {
    if (type == ActivityType::charge) return battery ? charge_duration(other.battery, *battery) : 0.0;
    return config.nominal_duration(activity.location, type, config.trucks[other.id]);
  };
  const ActivityType service =
      activity.type == ActivityType::queue
          ? (config.network.location(activity.location).kind == LocationKind::charging_bay
                 ? ActivityType::charge
                 : (config.network.location(activity.location).kind == LocationKind::loading_station
                        ? ActivityType::load
                        : ActivityType::unload))
          : activity.type;
  f.duration = activity.type == ActivityType::queue ? 0.0 : service_time(t, service);

  const auto& st = state.stations().at(activity.location);
  if (st.servers == 0) return f;
  std::vector<Seconds> free_at;
  for (const auto& other : state.trucks()) {
    if (other.station == activity.location && other.in_service && !other.disabled && other.id != truck) {
      free_at.push_back(std::max(0.0, other.activity_end - state.clock()));
    }
  }
  free_at.resize(std::max<std::size_t>(free_at.size(), st.servers), 0.0);
  std::sort(free_at.begin(), free_at.end());
  free_at.resize(st.servers);
  for (TruckIndex q : state.station_queue(activity.location)) {
    if (q == truck) break;
    auto it = std::min_element(free_at.begin(), free_at.end());
    const auto& other = state.truck(q);
    const ActivityType type = other.has_pending() ? other.next_pending().type : service;
    *it += service_time(other, type);
  }
  f.wait = *std::min_element(free_at.begin(), free_at.end());
  return f;
}

}  // namespace dispatch
