#include "settings.hpp"

#include <cctype>

namespace hubspoke::cli {

std::string env_name(std::string_view key) {
  std::string out = "HUBSPOKE_";
  for (char ch : key) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  return out;
}

std::string flag_name(std::string_view key) {
  std::string out = "--";
  for (char ch : key) out.push_back(ch == '_' ? '-' : ch);
  return out;
}

Settings resolve_settings(const std::optional<std::filesystem::path>& config_file,
                          const EnvLookup& env,
                          const std::map<std::string, std::string>& flags) {
  Settings s;
  auto set = [&](const std::string& key, const std::string& value) {
    apply_config_value(s.config, key, value);
    s.explicit_keys.insert(key);
  };
  if (config_file) {
    for (const auto& [key, value] : read_config_entries(*config_file)) set(key, value);
  }
  if (env) {
    for (auto key : config_keys()) {
      if (const char* value = env(env_name(key).c_str()); value && *value) set(std::string(key), value);
    }
  }
  for (const auto& [key, value] : flags) set(key, value);
  validate(s.config);
  return s;
}

void apply_to_instance(Instance& instance, const Settings& settings) {
  const auto& k = settings.explicit_keys;
  const auto& c = settings.config;
  if (k.contains("truck_capacity")) instance.fleet.truck_capacity = c.truck_capacity;
  if (k.contains("truck_fixed_cost")) instance.fleet.truck_fixed_cost = c.truck_fixed_cost;
  if (k.contains("cost_per_km")) instance.fleet.cost_per_km = c.cost_per_km;
  if (k.contains("shift_start_min")) instance.fleet.shift_start_min = c.shift_start_min;
  if (k.contains("shift_end_min")) instance.fleet.shift_end_min = c.shift_end_min;
  if (c.depot && (k.contains("depot_lat") || k.contains("depot_lon"))) instance.depot = c.depot;
  validate(instance, c.allow_intra_point);
}

}  // namespace hubspoke::cli
