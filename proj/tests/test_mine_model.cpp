#include <algorithm>
#include <numeric>
#include <random>

#include <doctest.h>

#include "support.hpp"

using namespace dispatch;
using support::json;

namespace {

json four_nodes(double direct) {
  auto doc = support::small_mine(1);
  doc["locations"] = json::array({
      {{"id", "A"}, {"kind", "loading-station"}},
      {{"id", "B"}, {"kind", "unloading-station"}},
      {{"id", "X"}, {"kind", "charging-bay"}},
      {{"id", "Y"}, {"kind", "parking-bay"}},
  });
  doc["edges"] = json::array({
      {{"from", "A"}, {"to", "B"}, {"duration", direct}},
      {{"from", "A"}, {"to", "X"}, {"duration", 200}},
      {{"from", "X"}, {"to", "B"}, {"duration", 300}},
      {{"from", "A"}, {"to", "Y"}, {"duration", 100}},
      {{"from", "Y"}, {"to", "X"}, {"duration", 50}},
      {{"from", "B"}, {"to", "A"}, {"duration", 900}},
      {{"from", "X"}, {"to", "Y"}, {"duration", 10}},
  });
  doc["trucks"][0]["start"] = "Y";
  doc["tasks"] = json::array({{{"id", "t"}, {"source", "A"}, {"destination", "B"}, {"material", "ore"}, {"rate", 100}}});
  return doc;
}

// Minimal weight over every simple path, by enumerating vertex orderings.
Seconds brute_force(const MineConfig& config, LocationIndex from, LocationIndex to) {
  const auto n = static_cast<LocationIndex>(config.network.size());
  auto weight = [&](LocationIndex a, LocationIndex b) {
    Seconds w = kNever;
    for (const auto& e : config.network.edges()) {
      if (e.from == a && e.to == b) w = std::min(w, e.weight);
    }
    return w;
  };
  if (from == to) return 0.0;
  std::vector<LocationIndex> middle;
  for (LocationIndex i = 0; i < n; ++i) {
    if (i != from && i != to) middle.push_back(i);
  }
  Seconds best = kNever;
  for (std::size_t mask = 0; mask < (1u << middle.size()); ++mask) {
    std::vector<LocationIndex> pick;
    for (std::size_t k = 0; k < middle.size(); ++k) {
      if (mask & (1u << k)) pick.push_back(middle[k]);
    }
    std::sort(pick.begin(), pick.end());
    do {
      Seconds total = 0.0;
      LocationIndex at = from;
      for (auto v : pick) {
        total += weight(at, v);
        at = v;
      }
      total += weight(at, to);
      best = std::min(best, total);
    } while (std::next_permutation(pick.begin(), pick.end()));
  }
  return best;
}

}  // namespace

TEST_CASE("validate_scenario on the reference scenario") {
  const auto config = support::reference();
  CHECK(validate_scenario(config).ok());
  CHECK(config.trucks.size() == 5);
  CHECK(config.tasks.size() == 4);
  for (const auto& t : config.trucks) CHECK(t.capacity == 100.0);
}

TEST_CASE("validate_scenario reports invariant violations") {
  auto bad_kind = support::small_mine(1);
  bad_kind["tasks"][0]["destination"] = "W";
  CHECK(validate_scenario(support::build(bad_kind)).contains("task endpoint kind mismatch"));

  auto zero_edge = support::small_mine(1);
  zero_edge["edges"][0]["duration"] = 0;
  CHECK(validate_scenario(support::build(zero_edge)).contains("non-positive edge weight"));

  auto duplicate = support::small_mine(2);
  duplicate["trucks"][1]["id"] = "v0";
  CHECK(validate_scenario(support::build(duplicate)).contains("duplicate truck id"));

  auto hot = support::small_mine(1);
  hot["trucks"][0]["tyre"] = 120;
  CHECK(validate_scenario(support::build(hot)).contains("initial tyre temperature"));

  auto negative_rate = support::small_mine(1);
  negative_rate["tasks"][1]["rate"] = 0;
  CHECK(validate_scenario(support::build(negative_rate)).contains("non-positive target rate"));

  auto unreachable = support::small_mine(1);
  unreachable["edges"] = json::array({{{"from", "L"}, {"to", "C"}, {"duration", 900}}});
  CHECK_FALSE(validate_scenario(support::build(unreachable)).ok());
}

TEST_CASE("parse errors are distinct from validation failures") {
  CHECK_THROWS_AS(parse_scenario("{ not json"), ParseError);
  CHECK_THROWS_AS(parse_scenario("{}"), ParseError);

  auto bad_enum = support::small_mine(1);
  bad_enum["locations"][0]["kind"] = "loading_station";
  CHECK_THROWS_AS(support::build(bad_enum), ParseError);

  auto window = support::small_mine(1);
  window["constraints"].push_back({{"kind", "window"}});
  CHECK_THROWS_WITH_AS(support::build(window), "unimplemented: no model specified in source for 'window'", ParseError);

  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), ParseError);
}

TEST_CASE("transit_duration") {
  const auto config = support::build(four_nodes(900));
  const auto a = support::loc(config, "A");
  const auto b = support::loc(config, "B");
  CHECK(transit_duration(config.network, a, a) == 0.0);

  const auto direct = support::build(four_nodes(400));
  CHECK(transit_duration(direct.network, a, b) == 400.0);

  // A -> Y -> X -> B (100 + 50 + 300) beats the 900 s edge and A -> X -> B.
  CHECK(transit_duration(config.network, a, b) == brute_force(config, a, b));
  CHECK(transit_duration(config.network, a, b) == 450.0);
  for (LocationIndex i = 0; i < 4; ++i) {
    for (LocationIndex j = 0; j < 4; ++j) CHECK(transit_duration(config.network, i, j) == brute_force(config, i, j));
  }

  auto one_way = support::small_mine(1);
  one_way["edges"] = json::array({{{"from", "L"}, {"to", "C"}, {"duration", 900}}});
  const auto sparse = support::build(one_way);
  CHECK_THROWS_AS(transit_duration(sparse.network, support::loc(sparse, "C"), support::loc(sparse, "L")),
                  UnreachableError);
  CHECK_THROWS_AS(transit_duration(sparse.network, 0, 99), std::out_of_range);
}

TEST_CASE("transit durations satisfy the triangle inequality") {
  const auto config = support::reference();
  const auto n = static_cast<LocationIndex>(config.network.size());
  for (LocationIndex i = 0; i < n; ++i) {
    for (LocationIndex j = 0; j < n; ++j) {
      for (LocationIndex k = 0; k < n; ++k) {
        CHECK(transit_duration(config.network, i, k) <=
              transit_duration(config.network, i, j) + transit_duration(config.network, j, k));
      }
    }
  }
}

TEST_CASE("nominal durations fall back to capacity over handling rate") {
  auto doc = support::small_mine(1);
  doc["activities"] = json::array({{{"location", "W"}, {"type", "load"}, {"duration", 120}}});
  const auto config = support::build(doc);
  const auto& truck = config.trucks[0];
  CHECK(config.nominal_duration(support::loc(config, "L"), ActivityType::load, truck) == 600.0);
  CHECK(config.nominal_duration(support::loc(config, "W"), ActivityType::load, truck) == 120.0);
  CHECK(config.nominal_duration(support::loc(config, "C"), ActivityType::unload, truck) == 600.0);
}

TEST_CASE("reference T_3 round trip is under half of the others") {
  const auto config = support::reference();
  auto round_trip = [&](const HaulageTask& t) {
    return transit_duration(config.network, t.source, t.destination) +
           transit_duration(config.network, t.destination, t.source);
  };
  const double t3 = round_trip(config.tasks[3]);
  for (int k = 0; k < 3; ++k) CHECK(t3 < 0.5 * round_trip(config.tasks[k]));
}
