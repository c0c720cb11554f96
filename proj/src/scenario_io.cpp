#include "minedispatch/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dispatch {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
  return obj.at(key);
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
T get_req(const json& obj, const char* key) {
  try {
    return require(obj, key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad value for '") + key + "': " + e.what());
  }
}

const json& require_array(const json& doc, const char* key) {
  const json& arr = require(doc, key);
  if (!arr.is_array()) throw ParseError(std::string("'") + key + "' must be an array");
  return arr;
}

LocationIndex location_ref(const RoadNetwork& net, const std::string& id) {
  return net.find(id).value_or(kNoIndex);
}

MaterialIndex material_ref(const MineConfig& cfg, const std::string& id) {
  return cfg.find_material(id).value_or(kNoIndex);
}

BatteryModel parse_battery(const json& j) {
  BatteryModel m;
  m.min_level = get_or(j, "B_min", m.min_level);
  m.charge_rate = get_or(j, "k_charge", m.charge_rate);
  if (j.contains("k_discharge")) {
    const json& k = j.at("k_discharge");
    if (!k.is_object()) throw ParseError("'k_discharge' must be an object");
    for (auto it = k.begin(); it != k.end(); ++it) {
      if (it.key() == "charge_queue") {
        m.charge_queue_rate = it.value().get<double>();
        continue;
      }
      auto type = parse_activity_type(it.key());
      if (!type || *type == ActivityType::charge) throw ParseError("unknown discharge activity '" + it.key() + "'");
      m.discharge_rate[static_cast<std::size_t>(*type)] = it.value().get<double>();
    }
  }
  return m;
}

TyreModel parse_tyre(const json& j) {
  TyreModel m;
  m.soft_threshold = get_or(j, "Y_Th", m.soft_threshold);
  m.hard_limit = get_or(j, "Y_max", m.hard_limit);
  m.heating_rate = get_or(j, "k_h", m.heating_rate);
  m.cooling_rate = get_or(j, "k_c", m.cooling_rate);
  m.delay_scale = get_or(j, "K", m.delay_scale);
  m.park_target = get_or(j, "y_final", m.park_target);
  m.min_park_duration = get_or(j, "min_park", m.min_park_duration);
  m.literal_cooling = get_or(j, "literal_cooling", m.literal_cooling);
  return m;
}

}  // namespace

MineConfig parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario root must be an object");

  MineConfig cfg;

  try {
    // Materials: explicit, or inferred from the tasks in order of appearance.
    if (doc.contains("materials")) {
      for (const auto& m : require_array(doc, "materials")) {
        Material mat{get_req<std::string>(m, "id"), MaterialKind::ore_grade};
        const auto kind = get_or<std::string>(m, "kind", "ore-grade");
        if (kind == "waste") {
          mat.kind = MaterialKind::waste;
        } else if (kind != "ore-grade") {
          throw ParseError("unknown material kind '" + kind + "'");
        }
        cfg.materials.push_back(std::move(mat));
      }
    } else {
      for (const auto& t : require_array(doc, "tasks")) {
        const auto id = get_req<std::string>(t, "material");
        if (!cfg.find_material(id)) {
          cfg.materials.push_back({id, id == "waste" ? MaterialKind::waste : MaterialKind::ore_grade});
        }
      }
    }

    std::vector<Location> locations;
    for (const auto& l : require_array(doc, "locations")) {
      const auto kind_name = get_req<std::string>(l, "kind");
      auto kind = parse_location_kind(kind_name);
      if (!kind) throw ParseError("unknown location kind '" + kind_name + "'");
      locations.push_back({get_req<std::string>(l, "id"), *kind});
    }
    auto find_loc = [&](const std::string& id) -> LocationIndex {
      for (std::size_t i = 0; i < locations.size(); ++i) {
        if (locations[i].id == id) return static_cast<LocationIndex>(i);
      }
      return kNoIndex;
    };

    std::vector<Edge> edges;
    for (const auto& e : require_array(doc, "edges")) {
      Edge edge{find_loc(get_req<std::string>(e, "from")), find_loc(get_req<std::string>(e, "to")),
                get_req<double>(e, "duration")};
      edges.push_back(edge);
      if (get_or(e, "bidirectional", false)) edges.push_back({edge.to, edge.from, edge.weight});
    }
    cfg.network = RoadNetwork(std::move(locations), std::move(edges));

    std::optional<LocationIndex> default_start = cfg.first_location_of(LocationKind::parking_bay);
    for (const auto& t : require_array(doc, "trucks")) {
      Truck truck;
      truck.id = get_req<std::string>(t, "id");
      truck.capacity = get_or(t, "capacity", truck.capacity);
      truck.initial_battery = get_or(t, "battery", truck.initial_battery);
      truck.initial_tyre = get_or(t, "tyre", truck.initial_tyre);
      if (t.contains("start")) {
        truck.start = location_ref(cfg.network, get_req<std::string>(t, "start"));
      } else {
        truck.start = default_start.value_or(cfg.network.size() > 0 ? 0 : kNoIndex);
      }
      cfg.trucks.push_back(std::move(truck));
    }

    for (const auto& t : require_array(doc, "tasks")) {
      HaulageTask task;
      task.id = get_req<std::string>(t, "id");
      task.source = location_ref(cfg.network, get_req<std::string>(t, "source"));
      task.destination = location_ref(cfg.network, get_req<std::string>(t, "destination"));
      task.material = material_ref(cfg, get_req<std::string>(t, "material"));
      task.target_rate = get_req<double>(t, "rate");
      cfg.tasks.push_back(std::move(task));
    }

    if (doc.contains("activities")) {
      for (const auto& a : require_array(doc, "activities")) {
        const auto type_name = get_req<std::string>(a, "type");
        auto type = parse_activity_type(type_name);
        if (!type) throw ParseError("unknown activity type '" + type_name + "'");
        cfg.activities.set({location_ref(cfg.network, get_req<std::string>(a, "location")), *type,
                            get_req<double>(a, "duration")});
      }
    }

    if (doc.contains("interaction")) {
      const json& in = doc.at("interaction");
      auto& m = cfg.interaction;
      m.charging_stations = get_or(in, "charging_stations", m.charging_stations);
      m.loader_rate = get_or(in, "loader_rate", m.loader_rate);
      m.unloader_rate = get_or(in, "unloader_rate", m.unloader_rate);
      m.break_length = get_or(in, "break_length", m.break_length);
      const auto discipline = get_or<std::string>(in, "queue_discipline", "fifo");
      if (discipline != "fifo") throw ParseError("unsupported queue discipline '" + discipline + "'");
      if (in.contains("crushers")) {
        for (const auto& c : require_array(in, "crushers")) {
          CrusherModel crusher;
          crusher.location = location_ref(cfg.network, get_req<std::string>(c, "location"));
          crusher.capacity = get_or(c, "V_max", crusher.capacity);
          crusher.processing_rate = get_or(c, "p", crusher.processing_rate);
          crusher.initial_volume.assign(cfg.materials.size(), 0.0);
          if (c.contains("initial")) {
            const json& init = c.at("initial");
            if (!init.is_object()) throw ParseError("crusher 'initial' must be an object");
            for (auto it = init.begin(); it != init.end(); ++it) {
              auto mat = cfg.find_material(it.key());
              if (!mat) throw ParseError("crusher initial volume names unknown material '" + it.key() + "'");
              crusher.initial_volume[*mat] = it.value().get<double>();
            }
          }
          m.crushers.push_back(std::move(crusher));
        }
      }
    }

    if (doc.contains("constraints")) {
      for (const auto& c : require_array(doc, "constraints")) {
        const auto kind_name = get_req<std::string>(c, "kind");
        if (kind_name == "window") throw ParseError("unimplemented: no model specified in source for 'window'");
        auto kind = parse_constraint_kind(kind_name);
        if (!kind) throw ParseError("unknown constraint kind '" + kind_name + "'");
        switch (*kind) {
          case ConstraintKind::battery: cfg.constraints.push_back(ConstraintSpec::battery(parse_battery(c))); break;
          case ConstraintKind::tyre: cfg.constraints.push_back(ConstraintSpec::tyre(parse_tyre(c))); break;
          case ConstraintKind::capacity: {
            CapacityLimit lim{location_ref(cfg.network, get_req<std::string>(c, "location")),
                              get_req<double>(c, "V_min")};
            for (auto& crusher : cfg.interaction.crushers) {
              if (crusher.location == lim.crusher) crusher.min_volume = lim.min_volume;
            }
            cfg.constraints.push_back(ConstraintSpec::capacity(lim));
            break;
          }
          case ConstraintKind::ratio: {
            RatioLimit lim;
            lim.crusher = location_ref(cfg.network, get_req<std::string>(c, "location"));
            const json& targets = require(c, "targets");
            if (!targets.is_object()) throw ParseError("ratio 'targets' must be an object");
            for (auto it = targets.begin(); it != targets.end(); ++it) {
              lim.targets.push_back({material_ref(cfg, it.key()), it.value().get<double>()});
            }
            const auto norm = get_or<std::string>(c, "normalization", "capacity");
            if (norm == "capacity") {
              lim.normalization = RatioNormalization::capacity;
            } else if (norm == "current-total") {
              lim.normalization = RatioNormalization::current_total;
            } else {
              throw ParseError("unknown ratio normalization '" + norm + "'");
            }
            for (auto& crusher : cfg.interaction.crushers) {
              if (crusher.location == lim.crusher) {
                crusher.ratio_targets = lim.targets;
                crusher.normalization = lim.normalization;
              }
            }
            cfg.constraints.push_back(ConstraintSpec::ratio(std::move(lim)));
            break;
          }
        }
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed scenario: ") + e.what());
  }
  return cfg;
}

MineConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

}  // namespace dispatch
