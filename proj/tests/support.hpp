#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "minedispatch/scenario_io.hpp"
#include "minedispatch/sim_engine.hpp"

namespace support {

using nlohmann::json;

inline dispatch::MineConfig build(const json& doc) { return dispatch::parse_scenario(doc.dump()); }

inline dispatch::MineConfig reference() {
  return dispatch::load_scenario(std::string(DISPATCH_SCENARIO_DIR) + "/reference.json");
}

inline json reference_doc() {
  const auto path = std::string(DISPATCH_SCENARIO_DIR) + "/reference.json";
  std::ifstream in(path);
  return json::parse(in);
}

// One ore route L -> C (crusher), one waste route W -> D, a charging bay and
// a parking bay. Every edge is bidirectional.
inline json small_mine(int trucks = 1) {
  json doc;
  doc["materials"] = json::array({{{"id", "ore"}, {"kind", "ore-grade"}}, {{"id", "waste"}, {"kind", "waste"}}});
  doc["locations"] = json::array({
      {{"id", "L"}, {"kind", "loading-station"}},
      {{"id", "W"}, {"kind", "loading-station"}},
      {{"id", "C"}, {"kind", "unloading-station"}},
      {{"id", "D"}, {"kind", "unloading-station"}},
      {{"id", "CB"}, {"kind", "charging-bay"}},
      {{"id", "PB"}, {"kind", "parking-bay"}},
  });
  auto edge = [](const char* a, const char* b, double d) {
    return json{{"from", a}, {"to", b}, {"duration", d}, {"bidirectional", true}};
  };
  doc["edges"] = json::array({edge("L", "C", 900), edge("W", "D", 600), edge("C", "D", 600), edge("C", "CB", 300),
                              edge("CB", "PB", 300), edge("PB", "L", 300), edge("PB", "W", 300)});
  doc["trucks"] = json::array();
  for (int i = 0; i < trucks; ++i) {
    doc["trucks"].push_back(
        {{"id", "v" + std::to_string(i)}, {"capacity", 100}, {"battery", 100}, {"tyre", 35}, {"start", "PB"}});
  }
  doc["tasks"] = json::array({
      {{"id", "ore"}, {"source", "L"}, {"destination", "C"}, {"material", "ore"}, {"rate", 100}},
      {{"id", "waste"}, {"source", "W"}, {"destination", "D"}, {"material", "waste"}, {"rate", 100}},
  });
  doc["interaction"] = {{"charging_stations", 1}, {"loader_rate", 600}, {"unloader_rate", 600}};
  doc["constraints"] = json::array();
  return doc;
}

inline json battery_block(double b_min = 10) {
  return {{"kind", "battery"},
          {"B_min", b_min},
          {"k_charge", 25},
          {"k_discharge", {{"transit", -30}, {"load", -15}, {"unload", -15}, {"queue", -5}, {"park", 0}}}};
}

inline json tyre_block() {
  return {{"kind", "tyre"}, {"Y_Th", 80}, {"Y_max", 90}, {"k_h", 20}, {"k_c", 0.5}, {"K", 1}, {"y_final", 55}};
}

inline dispatch::LocationIndex loc(const dispatch::MineConfig& config, std::string_view id) {
  return config.network.find(id).value();
}

// Runs every truck through `action` once at t = 0 and advances to `limit`.
inline void dispatch_all(dispatch::SimState& state, dispatch::Action action, dispatch::Seconds limit) {
  while (auto dp = dispatch::advance_to_decision(state, limit)) dispatch::apply_decision(state, dp->truck, action);
}

}  // namespace support
