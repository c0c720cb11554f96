#include "minedispatch/mcts_planner.hpp"

#include <chrono>

namespace dispatch {

namespace {

constexpr int kMaskedChild = -2;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double evaluate(const SimState& state, Seconds start, const SearchConfig& config) {
  if (!config.opportunity_cost) {
    return discounted_objective_over(state.flow_log(), state.config().tasks, start, config.discount, config.error);
  }
  return opportunity_cost_objective(state.flow_log(), state.config().tasks, state.outages(), start,
                                    config.discount, config.error);
}

// Marks inapplicable actions of a fresh node as never expandable.
void mask_inapplicable(SearchTree& tree, int node, const SimState& state, std::span<const Action> actions) {
  auto& n = tree.node(node);
  if (n.terminal) return;
  for (std::size_t a = 0; a < actions.size(); ++a) {
    if (!action_applicable(state, n.truck, actions[a])) {
      n.children[a] = kMaskedChild;
      --n.untried;
    }
  }
}

}  // namespace

std::vector<Action> available_actions(const MineConfig& config, ConstraintSet modelled) {
  std::vector<Action> actions;
  for (std::size_t t = 0; t < config.tasks.size(); ++t) actions.push_back(Action::haul(static_cast<TaskIndex>(t)));
  if (modelled.contains(ConstraintKind::battery) && config.battery_model()) actions.push_back(Action::charge());
  if (modelled.contains(ConstraintKind::tyre) && config.tyre_model()) actions.push_back(Action::park());
  return actions;
}

bool action_applicable(const SimState& state, TruckIndex truck, const Action& action) {
  if (action.kind != ActionKind::charge) return true;
  const auto& t = state.truck(truck);
  return t.battery < 100.0 ||
         state.config().network.location(t.location).kind != LocationKind::charging_bay;
}

int SearchTree::add_node(TruckIndex truck, Seconds time, int parent, int action_id, bool terminal) {
  DecisionNode n;
  n.truck = truck;
  n.time = time;
  n.parent = parent;
  n.action_id = action_id;
  n.terminal = terminal;
  if (!terminal) {
    n.children.assign(action_count_, -1);
    n.untried = static_cast<int>(action_count_);
  }
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size() - 1);
}

int select_child(const SearchTree& tree, int node, double exploration) {
  const DecisionNode& n = tree.node(node);
  const double range = n.value_max - n.value_min;
  const double log_n = std::log(static_cast<double>(std::max(1, n.visits)));
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n.children.size(); ++a) {
    const int c = n.children[a];
    if (c < 0) continue;
    const DecisionNode& child = tree.node(c);
    if (child.visits == 0) return static_cast<int>(a);
    const double q = range > 0.0 ? (child.mean() - n.value_min) / range : 0.5;
    const double score = q + exploration * std::sqrt(log_n / child.visits);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(a);
    }
  }
  return best;
}

void backpropagate(SearchTree& tree, std::span<const int> path, double value) {
  for (int i : path) {
    DecisionNode& n = tree.node(i);
    ++n.visits;
    n.value_sum += value;
    n.value_min = std::min(n.value_min, value);
    n.value_max = std::max(n.value_max, value);
  }
}

Action rollout_action(const SimState& state, TruckIndex truck, std::span<const Action> actions, SearchRng& rng) {
  const auto& config = state.config();
  const auto& t = state.truck(truck);
  double p_charge = 0.0;
  double p_park = 0.0;
  double rate_sum = 0.0;
  for (const auto& a : actions) {
    if (a.kind == ActionKind::charge) {
      if (!action_applicable(state, truck, a)) continue;
      p_charge = constraint_action_probability(*config.constraint(ConstraintKind::battery), t.battery, t.tyre);
    } else if (a.kind == ActionKind::park) {
      p_park = constraint_action_probability(*config.constraint(ConstraintKind::tyre), t.battery, t.tyre);
    } else {
      rate_sum += config.tasks[a.task].target_rate;
    }
  }
  const double u = rng.uniform01();
  if (u < p_charge) return Action::charge();
  if (u < std::min(1.0, p_charge + p_park)) return Action::park();
  double pick = rng.uniform01() * rate_sum;
  const Action* last_task = nullptr;
  for (const auto& a : actions) {
    if (a.kind != ActionKind::task) continue;
    last_task = &a;
    pick -= config.tasks[a.task].target_rate;
    if (pick < 0.0) return a;
  }
  if (last_task == nullptr) return p_park > 0.0 ? Action::park() : Action::charge();
  return *last_task;
}

double rollout(SimState& state, Seconds start, Seconds horizon_end, std::span<const Action> actions,
               const SearchConfig& config, SearchRng& rng) {
  while (auto dp = advance_to_decision(state, horizon_end)) {
    apply_decision(state, dp->truck, rollout_action(state, dp->truck, actions, rng));
  }
  return evaluate(state, start, config);
}

SearchTree search_tree(const SimState& state, TruckIndex truck, const SearchConfig& config) {
  const auto actions = available_actions(state.config(), config.generator_constraints);
  if (actions.empty()) throw std::invalid_argument("no legal actions at decision point");
  if (config.iterations <= 0) throw std::invalid_argument("search needs a positive iteration count");

  SimState root = state;
  root.set_options({config.generator_constraints, false, nullptr});
  root.prepare_for_planning();
  const Seconds start = root.clock();
  const Seconds horizon_end = start + config.discount.horizon;

  SearchTree tree(actions.size());
  tree.add_node(truck, start, -1, -1, false);
  mask_inapplicable(tree, 0, root, actions);
  SearchRng rng(config.seed);
  SimState work = root;
  std::vector<int> path;
  path.reserve(64);

  for (int it = 0; it < config.iterations; ++it) {
    work = root;
    path.clear();
    path.push_back(0);
    int cur = 0;
    for (;;) {
      if (tree.node(cur).terminal) break;
      if (tree.node(cur).untried > 0) {
        auto& n = tree.node(cur);
        std::size_t k = rng.below(static_cast<std::size_t>(n.untried));
        int a = 0;
        for (; a < static_cast<int>(n.children.size()); ++a) {
          if (n.children[static_cast<std::size_t>(a)] == -1 && k-- == 0) break;
        }
        const TruckIndex decider = n.truck;
        apply_decision(work, decider, actions[static_cast<std::size_t>(a)]);
        const auto dp = advance_to_decision(work, horizon_end);
        const int child = tree.add_node(dp ? dp->truck : kNoIndex, dp ? dp->time : work.clock(), cur, a, !dp);
        mask_inapplicable(tree, child, work, actions);
        auto& parent = tree.node(cur);
        parent.children[static_cast<std::size_t>(a)] = child;
        --parent.untried;
        path.push_back(child);
        break;
      }
      const int a = select_child(tree, cur, config.exploration);
      apply_decision(work, tree.node(cur).truck, actions[static_cast<std::size_t>(a)]);
      advance_to_decision(work, horizon_end);
      cur = tree.node(cur).children[static_cast<std::size_t>(a)];
      path.push_back(cur);
    }
    const double value = rollout(work, start, horizon_end, actions, config, rng);
    backpropagate(tree, path, value);
  }
  return tree;
}

PlanResult plan(const SimState& state, TruckIndex truck, const SearchConfig& config) {
  const auto wall_start = std::chrono::steady_clock::now();
  const auto actions = available_actions(state.config(), config.generator_constraints);
  if (actions.empty()) throw std::invalid_argument("no legal actions at decision point");
  if (config.iterations <= 0) throw std::invalid_argument("search needs a positive iteration count");

  PlanResult result;
  result.truck = truck;
  result.time = state.clock();
  if (actions.size() == 1) {
    result.action = actions.front();
    result.root_children.push_back({actions.front(), 0, 0.0});
    return result;
  }

  const SearchTree tree = search_tree(state, truck, config);
  const auto& root_node = tree.node(0);
  int best = -1;
  for (std::size_t a = 0; a < actions.size(); ++a) {
    const int c = root_node.children[a];
    if (c < 0) continue;
    const auto& child = tree.node(c);
    result.root_children.push_back({actions[a], child.visits, child.mean()});
    if (child.visits == 0) continue;
    if (best < 0) {
      best = static_cast<int>(a);
      continue;
    }
    const auto& incumbent = tree.node(root_node.children[static_cast<std::size_t>(best)]);
    if (child.mean() > incumbent.mean() ||
        (child.mean() == incumbent.mean() && child.visits > incumbent.visits)) {
      best = static_cast<int>(a);
    }
  }
  result.action = actions[static_cast<std::size_t>(best)];
  result.tree_size = tree.size();
  result.iterations = config.iterations;
  result.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall_start).count();
  return result;
}

RecedingHorizonResult run_receding_horizon(SimState world, Seconds duration, const SearchConfig& config,
                                           const DecisionOverride& override) {
  if (!(duration > 0.0)) throw std::invalid_argument("run duration must be positive");
  DecisionLog log;
  std::uint64_t index = 0;
  while (auto dp = advance_to_decision(world, duration)) {
    DecisionRecord rec;
    rec.time = dp->time;
    rec.truck = dp->truck;
    std::optional<Action> forced;
    if (override) forced = override(world, dp->truck);
    if (forced) {
      rec.action = *forced;
      rec.forced = true;
    } else {
      SearchConfig cfg = config;
      cfg.seed = splitmix64(config.seed ^ splitmix64(index));
      rec.search = plan(world, dp->truck, cfg);
      rec.action = rec.search.action;
    }
    apply_decision(world, dp->truck, rec.action);
    log.push_back(std::move(rec));
    ++index;
  }
  world.close_trace(duration);
  return {std::move(log), std::move(world)};
}

}  // namespace dispatch
