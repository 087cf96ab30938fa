#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "hubspoke/model.hpp"

namespace hubspoke::cli {

/// Merged runtime configuration and the keys that were set explicitly
/// (by file, environment or flag) rather than left at their defaults.
struct Settings {
  Config config;
  std::set<std::string> explicit_keys;
};

using EnvLookup = std::function<const char*(const char*)>;

/// HUBSPOKE_SPEED_KMH for speed_kmh.
std::string env_name(std::string_view key);
/// --speed-kmh for speed_kmh.
std::string flag_name(std::string_view key);

/// Layers defaults < config file < environment < flags, then validates.
Settings resolve_settings(const std::optional<std::filesystem::path>& config_file,
                          const EnvLookup& env,
                          const std::map<std::string, std::string>& flags);

/// Overrides the instance's fleet and depot with any explicitly set keys.
void apply_to_instance(Instance& instance, const Settings& settings);

}  // namespace hubspoke::cli
