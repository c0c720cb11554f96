#include "minedispatch/objective.hpp"

#include <algorithm>
#include <cmath>

#include "minedispatch/opportunity_cost.hpp"

namespace dispatch {

void FlowLog::append(const FlowLogEntry& entry) {
  if (!entries_.empty() && entry.time < entries_.back().time) {
    throw std::logic_error("flow log entries must be appended in time order");
  }
  if (entry.time < compacted_at_) throw std::logic_error("flow log entry precedes compaction time");
  entries_.push_back(entry);
}

void FlowLog::compact() {
  for (const auto& e : entries_) {
    auto it = std::find_if(base_.begin(), base_.end(), [&](const RouteTotal& r) {
      return r.source == e.source && r.destination == e.destination;
    });
    if (it == base_.end()) {
      base_.push_back({e.source, e.destination, e.tonnes});
    } else {
      it->tonnes += e.tonnes;
    }
  }
  if (!entries_.empty()) compacted_at_ = std::max(compacted_at_, entries_.back().time);
  entries_.clear();
}

void FlowLog::clear() {
  entries_.clear();
  base_.clear();
  compacted_at_ = -kNever;
}

double FlowLog::cumulative(LocationIndex source, LocationIndex destination, Seconds t) const {
  if (t < compacted_at_) throw std::logic_error("flow query precedes compaction time");
  double sum = 0.0;
  for (const auto& r : base_) {
    if (r.source == source && r.destination == destination) sum += r.tonnes;
  }
  for (const auto& e : entries_) {
    if (e.time > t) break;
    if (e.source == source && e.destination == destination) sum += e.tonnes;
  }
  return sum;
}

double FlowLog::total_tonnes() const {
  double sum = 0.0;
  for (const auto& r : base_) sum += r.tonnes;
  for (const auto& e : entries_) sum += e.tonnes;
  return sum;
}

double FlowLog::base_tonnes(LocationIndex source, LocationIndex destination) const {
  double sum = 0.0;
  for (const auto& r : base_) {
    if (r.source == source && r.destination == destination) sum += r.tonnes;
  }
  return sum;
}

FlowLog FlowLog::filtered(const std::function<bool(const FlowLogEntry&)>& keep) const {
  FlowLog out;
  out.base_ = base_;
  out.compacted_at_ = compacted_at_;
  for (const auto& e : entries_) {
    if (keep(e)) out.entries_.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------

double goal_volume(const HaulageTask& task, Seconds t) { return task.target_rate * to_hours(t); }

double cumulative_flow(const FlowLog& log, LocationIndex source, LocationIndex destination, Seconds t) {
  return log.cumulative(source, destination, t);
}

double objective_score(const FlowLog& log, std::span<const HaulageTask> tasks, Seconds end_time,
                       const ErrorFunctionSpec& err) {
  double score = 0.0;
  for (const auto& task : tasks) {
    score += err(cumulative_flow(log, task.source, task.destination, end_time) - goal_volume(task, end_time));
  }
  return score;
}

double discounted_objective(double initial, std::span<const double> increments, double factor) {
  double result = initial;
  double weight = 1.0;
  for (double delta : increments) {
    weight *= factor;
    result += weight * delta;
  }
  return result;
}

double halftime_to_discount(Seconds halftime, Seconds step) {
  if (!(step > 0.0) || !(halftime > 0.0)) throw std::invalid_argument("halftime and step must be positive");
  if (std::isinf(halftime)) return 1.0;
  return std::pow(0.5, step / halftime);
}

Seconds discount_to_halftime(double factor, Seconds step) {
  if (factor >= 1.0) return kNever;
  return step * std::log(0.5) / std::log(factor);
}

int discount_steps(const DiscountSpec& discount) {
  return std::max(1, static_cast<int>(std::ceil(discount.horizon / discount.step - 1e-9)));
}

double discounted_objective_over(const FlowLog& log, std::span<const HaulageTask> tasks, Seconds start,
                                 const DiscountSpec& discount, const ErrorFunctionSpec& err) {
  const auto& entries = log.entries();
  const std::size_t n_tasks = tasks.size();
  // Per-task cumulative flow at the current grid point.
  double flow_buf[16];
  std::vector<double> flow_heap;
  double* flow = flow_buf;
  if (n_tasks > 16) {
    flow_heap.assign(n_tasks, 0.0);
    flow = flow_heap.data();
  }
  std::size_t cursor = 0;
  auto score_at = [&](Seconds t) {
    while (cursor < entries.size() && entries[cursor].time <= t) {
      const auto& e = entries[cursor++];
      for (std::size_t k = 0; k < n_tasks; ++k) {
        if (tasks[k].source == e.source && tasks[k].destination == e.destination) flow[k] += e.tonnes;
      }
    }
    double s = 0.0;
    for (std::size_t k = 0; k < n_tasks; ++k) s += err(flow[k] - goal_volume(tasks[k], t));
    return s;
  };

  for (std::size_t k = 0; k < n_tasks; ++k) flow[k] = log.base_tonnes(tasks[k].source, tasks[k].destination);

  const int n = discount_steps(discount);
  double previous = score_at(start);
  double result = previous;
  double weight = 1.0;
  for (int i = 1; i <= n; ++i) {
    const double current = score_at(start + i * discount.step);
    weight *= discount.factor;
    result += weight * (current - previous);
    previous = current;
  }
  return result;
}

// ---------------------------------------------------------------------------

namespace {

FlowLog without_outages(const FlowLog& log, std::span<const TruckOutage> outages) {
  return log.filtered([&](const FlowLogEntry& e) {
    for (const auto& o : outages) {
      if (o.truck == e.truck && e.time > o.since) return false;
    }
    return true;
  });
}

}  // namespace

double opportunity_cost_objective(const FlowLog& log, std::span<const HaulageTask> tasks,
                                  std::span<const TruckOutage> outages, Seconds end_time,
                                  const ErrorFunctionSpec& err) {
  if (outages.empty()) return objective_score(log, tasks, end_time, err);
  return objective_score(without_outages(log, outages), tasks, end_time, err);
}

double opportunity_cost_objective(const FlowLog& log, std::span<const HaulageTask> tasks,
                                  std::span<const TruckOutage> outages, Seconds start,
                                  const DiscountSpec& discount, const ErrorFunctionSpec& err) {
  if (outages.empty()) return discounted_objective_over(log, tasks, start, discount, err);
  return discounted_objective_over(without_outages(log, outages), tasks, start, discount, err);
}

}  // namespace dispatch
