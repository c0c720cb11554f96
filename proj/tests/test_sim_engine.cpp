#include <algorithm>

#include <doctest.h>

#include "support.hpp"

using namespace dispatch;
using support::json;

namespace {

// Trucks parked at different distances from the parking bay.
json spread_fleet(std::initializer_list<double> distances) {
  auto doc = support::small_mine(0);
  doc["locations"] = json::array({{{"id", "L"}, {"kind", "loading-station"}},
                                  {{"id", "C"}, {"kind", "unloading-station"}},
                                  {{"id", "PB"}, {"kind", "parking-bay"}}});
  doc["edges"] = json::array({{{"from", "L"}, {"to", "C"}, {"duration", 900}, {"bidirectional", true}}});
  doc["tasks"] = json::array({{{"id", "ore"}, {"source", "L"}, {"destination", "C"}, {"material", "ore"}, {"rate", 100}}});
  int i = 0;
  for (double d : distances) {
    const std::string where = "S" + std::to_string(i);
    doc["locations"].push_back({{"id", where}, {"kind", "parking-bay"}});
    doc["edges"].push_back({{"from", where}, {"to", "PB"}, {"duration", d}, {"bidirectional", true}});
    doc["edges"].push_back({{"from", where}, {"to", "L"}, {"duration", 1000}, {"bidirectional", true}});
    doc["trucks"].push_back({{"id", "v" + std::to_string(i)}, {"capacity", 100}, {"start", where}});
    ++i;
  }
  return doc;
}

json with_crusher(json doc, double rate) {
  doc["interaction"]["crushers"] = json::array({{{"location", "C"}, {"V_max", 400}, {"p", rate}}});
  return doc;
}

// Single-server FIFO: service starts at max(arrival, previous end).
std::vector<double> fifo_starts(const std::vector<double>& arrivals, double service) {
  std::vector<double> starts;
  double free_at = 0.0;
  for (double a : arrivals) {
    const double s = std::max(a, free_at);
    starts.push_back(s);
    free_at = s + service;
  }
  return starts;
}

}  // namespace

TEST_CASE("next_decision_point picks the earliest finishing truck") {
  const auto config = support::build(spread_fleet({100, 50, 70}));
  SimState state(config, {});
  for (TruckIndex i = 0; i < 3; ++i) apply_decision(state, i, Action::park());
  const auto dp = next_decision_point(state);
  REQUIRE(dp);
  CHECK(dp->truck == 1);
  CHECK(dp->time == 50.0);

  const auto tied_config = support::build(spread_fleet({60, 60, 60}));
  SimState tied(tied_config, {});
  for (TruckIndex i = 0; i < 3; ++i) apply_decision(tied, i, Action::park());
  CHECK(next_decision_point(tied) == DecisionPoint{0, 60.0});

  const auto single_config = support::build(spread_fleet({80}));
  SimState single(single_config, {});
  apply_decision(single, 0, Action::park());
  CHECK(next_decision_point(single) == DecisionPoint{0, 80.0});
}

TEST_CASE("advance_to_decision returns trucks in (time, id) order") {
  const auto config = support::build(spread_fleet({30, 10, 20}));
  SimState state(config, {});
  CHECK(advance_to_decision(state, kNever) == DecisionPoint{0, 0.0});
  apply_decision(state, 0, Action::park());
  CHECK(advance_to_decision(state, kNever) == DecisionPoint{1, 0.0});
  apply_decision(state, 1, Action::park());
  CHECK(advance_to_decision(state, kNever) == DecisionPoint{2, 0.0});
  apply_decision(state, 2, Action::park());
  // Transit to PB then a 1800 s break.
  CHECK(advance_to_decision(state, kNever) == DecisionPoint{1, 1810.0});
  CHECK_THROWS_AS(apply_decision(state, 0, Action::park()), std::logic_error);
  CHECK_FALSE(advance_to_decision(state, 1000.0));
  CHECK(state.clock() == 1810.0);
}

TEST_CASE("apply_decision from a co-located loader starts with the load") {
  auto doc = support::reference_doc();
  doc["trucks"][0]["start"] = "L_1";
  const auto config = support::build(doc);
  SimState state(config, {{}, true, nullptr});
  apply_decision(state, 0, Action::haul(0));
  const auto& t = state.truck(0);
  CHECK(t.activity == ActivityType::load);
  CHECK(t.location == support::loc(config, "L_1"));
  CHECK(t.activity_end == 600.0);
  CHECK_THROWS_AS(apply_decision(state, 1, Action::haul(9)), std::invalid_argument);
}

TEST_CASE("charging from 25 % takes 3 h") {
  auto doc = support::reference_doc();
  doc["trucks"][0]["start"] = "CB";
  doc["trucks"][0]["battery"] = 25;
  const auto config = support::build(doc);
  SimState state(config, {{ConstraintKind::battery}, false, nullptr});
  apply_decision(state, 0, Action::charge());
  const auto& t = state.truck(0);
  CHECK(t.activity == ActivityType::charge);
  CHECK(t.activity_end - t.activity_start == doctest::Approx(hours(3.0)).epsilon(1e-12));
  std::optional<DecisionPoint> dp;
  while ((dp = advance_to_decision(state, hours(5.0))) && dp->truck != 0) apply_decision(state, dp->truck, Action::park());
  REQUIRE(dp);
  CHECK(dp->time == doctest::Approx(hours(3.0)).epsilon(1e-12));
  CHECK(state.truck(0).battery == 100.0);
}

TEST_CASE("unloading adds to the flow log and the crusher bin") {
  auto doc = support::reference_doc();
  doc["trucks"][0]["start"] = "L_1";
  const auto config = support::build(doc);
  SimState state(config, {});
  state.set_bin_volumes(0, {0.0, 0.0, 0.0, 0.0});
  apply_decision(state, 0, Action::haul(0));
  std::optional<DecisionPoint> dp;
  while ((dp = advance_to_decision(state, kNever)) && dp->truck != 0) apply_decision(state, dp->truck, Action::park());
  REQUIRE(dp);
  CHECK(dp->time == 600.0 + 900.0 + 600.0);
  REQUIRE(state.flow_log().entries().size() == 1);
  const auto& e = state.flow_log().entries().front();
  CHECK(e.source == support::loc(config, "L_1"));
  CHECK(e.destination == support::loc(config, "UL_1"));
  CHECK(e.material == config.find_material("M_1").value());
  CHECK(e.tonnes == 100.0);
  CHECK(state.crusher_at(support::loc(config, "UL_1"))->volumes[e.material] == 100.0);
}

TEST_CASE("activity_duration forecasts") {
  auto doc = support::small_mine(2);
  doc["trucks"][0]["start"] = "L";
  doc["trucks"][1]["start"] = "L";
  const auto config = support::build(doc);
  const auto l = support::loc(config, "L");
  SimState state(config, {});

  const auto free = activity_duration(state, 0, {ActivityType::load, l});
  CHECK(free.wait == 0.0);
  CHECK(free.duration == 600.0);
  CHECK(activity_duration(state, 0, {ActivityType::transit, support::loc(config, "C")}).duration == 900.0);

  apply_decision(state, 0, Action::haul(0));
  step_stations(state, 400.0);
  const auto busy = activity_duration(state, 1, {ActivityType::load, l});
  CHECK(busy.wait == fifo_starts({0.0, 400.0}, 600.0)[1] - 400.0);
  CHECK(busy.wait == 200.0);
  CHECK(busy.duration == 600.0);
}

TEST_CASE("loader queue follows the FIFO timeline") {
  auto doc = support::small_mine(4);
  doc["trucks"][0]["start"] = "L";
  doc["trucks"][1]["start"] = "L";
  doc["trucks"][2]["start"] = "PB";  // 300 s away
  doc["trucks"][3]["start"] = "W";   // 600 s away via PB
  const auto config = support::build(doc);
  SimState state(config, {{}, true, nullptr});
  const Seconds end = hours(1.0);
  while (auto dp = advance_to_decision(state, end)) apply_decision(state, dp->truck, Action::haul(0));
  state.close_trace(end);

  const auto l = support::loc(config, "L");
  std::vector<double> starts(4, -1.0);
  for (const auto& r : state.trace()) {
    if (r.type == ActivityType::load && r.location == l && r.decision < 4) starts[r.truck] = r.start;
  }
  const auto expected = fifo_starts({0.0, 0.0, 300.0, 600.0}, 600.0);
  CHECK(starts == expected);
}

TEST_CASE("step_stations drains crusher bins") {
  const auto config = support::build(with_crusher(support::small_mine(1), 600.0));
  SimState state(config, {});
  state.set_bin_volumes(0, {300.0, 0.0});
  step_stations(state, 900.0);
  CHECK(state.crushers()[0].total() == doctest::Approx(150.0).epsilon(1e-12));
  CHECK(state.clock() == 900.0);
  step_stations(state, 900.0);
  CHECK(state.crushers()[0].total() == doctest::Approx(150.0).epsilon(1e-12));

  SimState small(config, {});
  small.set_bin_volumes(0, {50.0, 0.0});
  step_stations(small, 3600.0);
  CHECK(small.crushers()[0].total() == 0.0);
  CHECK_THROWS(step_stations(small, 100.0));
}

TEST_CASE("every task emits the six activities in order") {
  const auto config = support::reference();
  SimState state(config, {{}, true, nullptr});
  const Seconds end = hours(6.0);
  int k = 0;
  while (auto dp = advance_to_decision(state, end)) apply_decision(state, dp->truck, Action::haul(static_cast<TaskIndex>(k++ % 4)));
  std::vector<std::vector<ActivityType>> by_decision(static_cast<std::size_t>(state.decisions_applied()));
  for (const auto& r : state.trace()) by_decision[static_cast<std::size_t>(r.decision)].push_back(r.type);
  const std::vector<ActivityType> six{ActivityType::transit, ActivityType::queue,   ActivityType::load,
                                      ActivityType::transit, ActivityType::queue,   ActivityType::unload};
  int complete = 0;
  for (const auto& seq : by_decision) {
    if (seq.size() == 6) {
      CHECK(seq == six);
      ++complete;
    }
  }
  CHECK(complete > 10);
}

TEST_CASE("the charging bay serves several trucks at once") {
  auto doc = support::reference_doc();
  for (auto& t : doc["trucks"]) {
    t["start"] = "CB";
    t["battery"] = 50;
  }
  const auto config = support::build(doc);
  SimState state(config, {{ConstraintKind::battery}, false, nullptr});
  for (TruckIndex i = 0; i < 5; ++i) apply_decision(state, i, Action::charge());
  int charging = 0;
  for (const auto& t : state.trucks()) charging += t.activity == ActivityType::charge ? 1 : 0;
  CHECK(charging == config.interaction.charging_stations);
  CHECK(state.station_queue(support::loc(config, "CB")).size() == 5 - charging);
}

TEST_CASE("battery below the minimum disables the truck") {
  auto doc = support::small_mine(1);
  doc["trucks"][0]["battery"] = 12;
  doc["constraints"].push_back(support::battery_block());
  const auto config = support::build(doc);
  SimState state(config, {{ConstraintKind::battery}, false, nullptr});
  apply_decision(state, 0, Action::haul(0));
  CHECK_FALSE(advance_to_decision(state, hours(4.0)));
  CHECK(state.truck(0).disabled);
  CHECK(state.violation_count(ConstraintKind::battery) == 1);
  REQUIRE(state.outages().size() == 1);
  CHECK(state.outages()[0].since == 300.0);
  CHECK(state.flow_log().entries().empty());
}

TEST_CASE("hot tyres slow transits") {
  auto doc = support::small_mine(1);
  doc["trucks"][0]["tyre"] = 85;
  doc["constraints"].push_back(support::tyre_block());
  const auto config = support::build(doc);
  SimState state(config, {{ConstraintKind::tyre}, true, nullptr});
  apply_decision(state, 0, Action::haul(0));
  const auto& t = state.truck(0);
  CHECK(t.activity == ActivityType::transit);
  CHECK(t.activity_end == 600.0);
  CHECK(t.activity_delay.seconds == 300.0);
  CHECK(state.violation_count(ConstraintKind::tyre) == 1);
}

TEST_CASE("park duration follows the cooldown model") {
  auto doc = support::small_mine(1);
  doc["trucks"][0]["tyre"] = 85;
  doc["constraints"].push_back(support::tyre_block());
  const auto config = support::build(doc);
  SimState state(config, {{ConstraintKind::tyre}, false, nullptr});
  apply_decision(state, 0, Action::park());
  const auto& t = state.truck(0);
  CHECK(t.activity == ActivityType::park);
  CHECK(t.activity_end == doctest::Approx(park_cooldown_duration(85.0, 55.0, *config.tyre_model())).epsilon(1e-12));

  SimState plain(config, {});
  apply_decision(plain, 0, Action::park());
  CHECK(plain.truck(0).activity_end == config.interaction.break_length);
}

TEST_CASE("clones are independent") {
  const auto config = support::reference();
  SimState a(config, {});
  apply_decision(a, 0, Action::haul(1));
  const Seconds end_before = a.truck(0).activity_end;
  SimState b = a;
  while (auto dp = advance_to_decision(b, hours(3.0))) apply_decision(b, dp->truck, Action::haul(0));
  CHECK(a.clock() == 0.0);
  CHECK(a.flow_log().entries().empty());
  CHECK(a.truck(0).activity_end == end_before);
  CHECK(a.truck(1).awaiting_decision);
  CHECK(a.crushers()[0].volumes == config.interaction.crushers[0].initial_volume);
  CHECK_FALSE(b.flow_log().entries().empty());
}
