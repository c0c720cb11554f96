#pragma once

#include <functional>
#include <span>
#include <vector>

#include "minedispatch/mine_model.hpp"

namespace dispatch {

struct FlowLogEntry {
  Seconds time = 0.0;
  LocationIndex source = kNoIndex;
  LocationIndex destination = kNoIndex;
  MaterialIndex material = kNoIndex;
  double tonnes = 0.0;
  TruckIndex truck = kNoIndex;
};

/// Append-only, time-ordered delivery log. `compact()` folds every entry into
/// per-route base totals; queries earlier than the compaction time are then
/// no longer answerable.
class FlowLog {
 public:
  void append(const FlowLogEntry& entry);
  void compact();
  void clear();

  const std::vector<FlowLogEntry>& entries() const { return entries_; }
  Seconds compacted_at() const { return compacted_at_; }

  /// Tonnes delivered on the route with time <= t.
  double cumulative(LocationIndex source, LocationIndex destination, Seconds t) const;
  double total_tonnes() const;
  /// Tonnes folded into the route total by earlier compactions.
  double base_tonnes(LocationIndex source, LocationIndex destination) const;

  /// Copy keeping the base totals and only the entries accepted by `keep`.
  FlowLog filtered(const std::function<bool(const FlowLogEntry&)>& keep) const;

 private:
  struct RouteTotal {
    LocationIndex source;
    LocationIndex destination;
    double tonnes;
  };
  std::vector<FlowLogEntry> entries_;
  std::vector<RouteTotal> base_;
  Seconds compacted_at_ = -kNever;
};

/// Piecewise-linear deviation penalty: shortfall_slope * x below target,
/// surplus_slope * x above.
struct ErrorFunctionSpec {
  double shortfall_slope = 1.0;
  double surplus_slope = 0.1;  // kappa

  double operator()(double deviation) const {
    return deviation < 0.0 ? shortfall_slope * deviation : surplus_slope * deviation;
  }
};

struct DiscountSpec {
  double factor = 1.0;      // zeta in (0, 1]
  Seconds step = 600.0;     // Delta t
  Seconds horizon = 3600.0; // H
};

/// Cumulative target volume r * t.
double goal_volume(const HaulageTask& task, Seconds t);

double cumulative_flow(const FlowLog& log, LocationIndex source, LocationIndex destination, Seconds t);

/// Sum over tasks of e(f - g) at time t_e.
double objective_score(const FlowLog& log, std::span<const HaulageTask> tasks, Seconds end_time,
                       const ErrorFunctionSpec& err);

/// o(0) + sum_i zeta^i * increments[i-1].
double discounted_objective(double initial, std::span<const double> increments, double factor);

/// zeta = 0.5^(step / halftime); returns 1 for an infinite halftime.
double halftime_to_discount(Seconds halftime, Seconds step);
Seconds discount_to_halftime(double factor, Seconds step);

/// Discounted objective over the grid start + i*step, i = 0..n with
/// n = ceil(horizon / step), sampling objective_score at each grid point.
double discounted_objective_over(const FlowLog& log, std::span<const HaulageTask> tasks, Seconds start,
                                 const DiscountSpec& discount, const ErrorFunctionSpec& err);

/// Number of grid steps covering the horizon.
int discount_steps(const DiscountSpec& discount);

}  // namespace dispatch
