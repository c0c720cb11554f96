#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dispatch {

// All simulation time is in seconds; rates in the scenario file are per hour.
using Seconds = double;

inline constexpr Seconds kSecondsPerHour = 3600.0;
inline constexpr Seconds kNever = std::numeric_limits<Seconds>::infinity();

constexpr Seconds hours(double h) { return h * kSecondsPerHour; }
constexpr double to_hours(Seconds s) { return s / kSecondsPerHour; }

using LocationIndex = std::uint16_t;
using MaterialIndex = std::uint16_t;
using TruckIndex = std::uint16_t;
using TaskIndex = std::uint16_t;

inline constexpr std::uint16_t kNoIndex = std::numeric_limits<std::uint16_t>::max();

enum class ActivityType : std::uint8_t { transit, load, queue, unload, charge, park };

inline constexpr std::array<ActivityType, 6> kActivityTypes = {
    ActivityType::transit, ActivityType::load,   ActivityType::queue,
    ActivityType::unload,  ActivityType::charge, ActivityType::park};

std::string_view to_string(ActivityType type);
std::optional<ActivityType> parse_activity_type(std::string_view name);

/// Ill-formed or unreadable scenario input. Distinct from a scenario that
/// parses but fails validation.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment or model configuration detected before any run.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnreachableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dispatch
