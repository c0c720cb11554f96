#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "minedispatch/sim_engine.hpp"

namespace dispatch {

struct SearchConfig {
  int iterations = 10000;
  DiscountSpec discount;  // horizon H measured from the root clock
  ErrorFunctionSpec error;
  double exploration = std::sqrt(2.0);
  std::uint64_t seed = 1;
  // Constraint families modelled by the generator. Charge is offered when
  // battery is modelled, park when tyre is modelled.
  ConstraintSet generator_constraints;
  // False scores rollouts with the plain discounted objective and ignores
  // truck outages.
  bool opportunity_cost = true;
};

/// Deterministic random source for search. Uniform draws use the top 53 bits
/// so results do not depend on the standard library's distributions.
class SearchRng {
 public:
  explicit SearchRng(std::uint64_t seed) : engine_(seed) {}
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform01() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

/// The global action list of a configuration: every task, then charge and
/// park when the corresponding constraint is modelled.
std::vector<Action> available_actions(const MineConfig& config, ConstraintSet modelled);

/// False for actions that would take no time, such as charging a full battery
/// at the charging bay.
bool action_applicable(const SimState& state, TruckIndex truck, const Action& action);

struct DecisionNode {
  TruckIndex truck = kNoIndex;  // truck deciding at this node
  Seconds time = 0.0;
  int parent = -1;
  int action_id = -1;  // action taken at the parent to reach this node
  bool terminal = false;  // no decision before the horizon
  int visits = 0;
  double value_sum = 0.0;
  double value_min = std::numeric_limits<double>::infinity();
  double value_max = -std::numeric_limits<double>::infinity();
  std::vector<int> children;  // node index per action id, -1 if untried, -2 if inapplicable
  int untried = 0;

  double mean() const { return visits > 0 ? value_sum / visits : 0.0; }
};

/// Arena-allocated search tree.
class SearchTree {
 public:
  explicit SearchTree(std::size_t action_count) : action_count_(action_count) {}

  int add_node(TruckIndex truck, Seconds time, int parent, int action_id, bool terminal);
  DecisionNode& node(int i) { return nodes_[static_cast<std::size_t>(i)]; }
  const DecisionNode& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t action_count() const { return action_count_; }

 private:
  std::size_t action_count_;
  std::vector<DecisionNode> nodes_;
};

/// Self-tuned UCB1 over the expanded children of `node`. Child means are
/// mapped into [0, 1] using the node's observed value range. Unvisited
/// children win outright; ties go to the lowest action id.
int select_child(const SearchTree& tree, int node, double exploration);

/// Adds `value` to every node on the path.
void backpropagate(SearchTree& tree, std::span<const int> path, double value);

/// Rollout policy choice for one decision point.
Action rollout_action(const SimState& state, TruckIndex truck, std::span<const Action> actions, SearchRng& rng);

/// Plays the rollout policy until no decision remains before `horizon_end`
/// and returns the discounted opportunity-cost objective from `start`.
double rollout(SimState& state, Seconds start, Seconds horizon_end, std::span<const Action> actions,
               const SearchConfig& config, SearchRng& rng);

struct ChildStats {
  Action action;
  int visits = 0;
  double mean = 0.0;
};

struct PlanResult {
  Action action;
  TruckIndex truck = kNoIndex;
  Seconds time = 0.0;
  std::vector<ChildStats> root_children;
  std::size_t tree_size = 0;
  int iterations = 0;
  double wall_time_ms = 0.0;
};

/// Grows the search tree for the truck deciding at the current clock of
/// `state`. Node 0 is the root.
SearchTree search_tree(const SimState& state, TruckIndex truck, const SearchConfig& config);

/// Runs the search for the truck deciding at the current clock of `state`.
/// Throws std::invalid_argument if the action set is empty.
PlanResult plan(const SimState& state, TruckIndex truck, const SearchConfig& config);

struct DecisionRecord {
  Seconds time = 0.0;
  TruckIndex truck = kNoIndex;
  Action action;
  bool forced = false;  // taken without search
  PlanResult search;    // empty when forced
};

using DecisionLog = std::vector<DecisionRecord>;

/// Hook that may replace the search with a fixed decision.
using DecisionOverride = std::function<std::optional<Action>(const SimState& world, TruckIndex truck)>;

struct RecedingHorizonResult {
  DecisionLog log;
  SimState final_state;
};

/// Receding-horizon loop: plan at each decision point, execute the chosen
/// action in `world`, advance, until the clock reaches `duration`.
/// Each decision uses a seed derived from config.seed and its index.
RecedingHorizonResult run_receding_horizon(SimState world, Seconds duration, const SearchConfig& config,
                                           const DecisionOverride& override = {});

}  // namespace dispatch
