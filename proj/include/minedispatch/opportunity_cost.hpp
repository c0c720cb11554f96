#pragma once

#include "minedispatch/objective.hpp"

namespace dispatch {

/// A truck that incurred an infinite violation delay at `since` and
/// contributes no flow afterwards.
struct TruckOutage {
  TruckIndex truck = kNoIndex;
  Seconds since = 0.0;
};

/// Objective with opportunity costs. Finite delays are already realised in the
/// delivery times of the log (activity durations d + delta); infinite delays
/// remove every delivery of the affected truck after its outage time.
double opportunity_cost_objective(const FlowLog& log, std::span<const HaulageTask> tasks,
                                  std::span<const TruckOutage> outages, Seconds end_time,
                                  const ErrorFunctionSpec& err);

/// Discounted variant over the horizon grid starting at `start`.
double opportunity_cost_objective(const FlowLog& log, std::span<const HaulageTask> tasks,
                                  std::span<const TruckOutage> outages, Seconds start,
                                  const DiscountSpec& discount, const ErrorFunctionSpec& err);

}  // namespace dispatch
