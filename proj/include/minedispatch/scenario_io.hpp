#pragma once

#include <filesystem>
#include <string>

#include "minedispatch/mine_model.hpp"

namespace dispatch {

/// Parses a scenario document. Throws ParseError for malformed JSON, missing
/// keys, wrong value types or unknown enum names. Dangling references (for
/// example a task naming a location that does not exist) are left for
/// validate_scenario to report.
MineConfig parse_scenario(const std::string& json_text);
MineConfig load_scenario(const std::filesystem::path& path);

}  // namespace dispatch
