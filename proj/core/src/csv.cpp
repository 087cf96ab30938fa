#include <charconv>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "hubspoke/error.hpp"
#include "hubspoke/model.hpp"
#include "text.hpp"

namespace hubspoke {
namespace detail {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> split_csv_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out += '"';
  return out;
}

}  // namespace detail

namespace {

using detail::parse_double;
using detail::split_csv_record;
using detail::split_lines;
using detail::trim;

void expect_header(std::string_view line, std::string_view expected, std::string_view what) {
  if (trim(line) != expected) {
    fail(ErrorCode::validation,
         fmt::format("{}: row 1: expected header '{}', got '{}'", what, expected, trim(line)));
  }
}

[[noreturn]] void reject(std::string_view what, const std::vector<std::string>& problems) {
  std::string msg = fmt::format("{}: {} rejected record(s): ", what, problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (i) msg += "; ";
    msg += problems[i];
  }
  fail(ErrorCode::validation, msg);
}

}  // namespace

std::vector<DemandPoint> parse_points_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) fail(ErrorCode::validation, "points: empty file");
  expect_header(lines[0], "id,lat,lon,pickup_demand,delivery_demand", "points");
  std::vector<DemandPoint> points;
  std::vector<std::string> problems;
  std::unordered_set<std::string> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row = li + 1;
    if (trim(lines[li]).empty()) continue;
    const auto f = split_csv_record(lines[li]);
    if (f.size() != 5) {
      problems.push_back(fmt::format("row {}: expected 5 fields, got {}", row, f.size()));
      continue;
    }
    if (f[0].empty()) {
      problems.push_back(fmt::format("row {}: empty id", row));
      continue;
    }
    const auto lat = parse_double(f[1]);
    const auto lon = parse_double(f[2]);
    if (!lat || !lon || !is_valid(GeoPoint{*lat, *lon})) {
      problems.push_back(fmt::format("row {}: malformed coordinate ({}, {})", row, f[1], f[2]));
      continue;
    }
    const auto pickup = parse_double(f[3]);
    const auto delivery = parse_double(f[4]);
    if (!pickup || !delivery || *pickup < 0.0 || *delivery < 0.0) {
      problems.push_back(fmt::format("row {}: demand must be a non-negative number", row));
      continue;
    }
    if (!seen.insert(f[0]).second) {
      problems.push_back(fmt::format("row {}: duplicate id '{}'", row, f[0]));
      continue;
    }
    points.push_back(DemandPoint{f[0], GeoPoint{*lat, *lon}, *pickup, *delivery});
  }
  if (!problems.empty()) reject("points", problems);
  return points;
}

std::vector<Parcel> parse_parcels_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) fail(ErrorCode::validation, "parcels: empty file");
  expect_header(lines[0], "id,origin,dest,size", "parcels");
  std::vector<Parcel> parcels;
  std::vector<std::string> problems;
  std::unordered_set<std::string> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row = li + 1;
    if (trim(lines[li]).empty()) continue;
    const auto f = split_csv_record(lines[li]);
    if (f.size() != 4) {
      problems.push_back(fmt::format("row {}: expected 4 fields, got {}", row, f.size()));
      continue;
    }
    if (f[0].empty() || f[1].empty() || f[2].empty()) {
      problems.push_back(fmt::format("row {}: empty id, origin or dest", row));
      continue;
    }
    const auto size = parse_double(f[3]);
    if (!size || *size <= 0.0) {
      problems.push_back(fmt::format("row {}: size must be a positive number", row));
      continue;
    }
    if (!seen.insert(f[0]).second) {
      problems.push_back(fmt::format("row {}: duplicate id '{}'", row, f[0]));
      continue;
    }
    parcels.push_back(Parcel{f[0], f[1], f[2], *size});
  }
  if (!problems.empty()) reject("parcels", problems);
  return parcels;
}

std::string points_to_csv(const std::vector<DemandPoint>& points) {
  std::string out = "id,lat,lon,pickup_demand,delivery_demand\n";
  for (const auto& p : points) {
    out += fmt::format("{},{},{},{},{}\n", detail::csv_escape(p.id),
                       detail::format_double(p.pos.lat), detail::format_double(p.pos.lon),
                       detail::format_double(p.pickup_demand),
                       detail::format_double(p.delivery_demand));
  }
  return out;
}

std::string parcels_to_csv(const std::vector<Parcel>& parcels) {
  std::string out = "id,origin,dest,size\n";
  for (const auto& p : parcels) {
    out += fmt::format("{},{},{},{}\n", detail::csv_escape(p.id), detail::csv_escape(p.origin),
                       detail::csv_escape(p.dest), detail::format_double(p.size));
  }
  return out;
}

Instance load_instance(const std::filesystem::path& points_csv,
                       const std::filesystem::path& parcels_csv, const Config& config) {
  validate(config);
  Instance inst;
  inst.points = parse_points_csv(read_text_file(points_csv));
  inst.parcels = parse_parcels_csv(read_text_file(parcels_csv));
  inst.depot = config.depot;
  inst.fleet = config.fleet();

  std::unordered_map<std::string_view, std::size_t> ids;
  for (std::size_t i = 0; i < inst.points.size(); ++i) ids.emplace(inst.points[i].id, i);
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < inst.parcels.size(); ++i) {
    const auto& p = inst.parcels[i];
    for (const auto* end : {&p.origin, &p.dest}) {
      if (!ids.contains(*end)) {
        problems.push_back(
            fmt::format("row {}: parcel '{}' references unknown point '{}'", i + 2, p.id, *end));
      }
    }
    if (p.origin == p.dest && !config.allow_intra_point) {
      problems.push_back(fmt::format("row {}: parcel '{}' has origin == dest ('{}')", i + 2, p.id,
                                     p.origin));
    }
  }
  if (!problems.empty()) reject("parcels", problems);
  validate(inst, config.allow_intra_point);
  return inst;
}

void save_instance_csv(const Instance& instance, const std::filesystem::path& points_csv,
                       const std::filesystem::path& parcels_csv) {
  write_text_file(points_csv, points_to_csv(instance.points));
  write_text_file(parcels_csv, parcels_to_csv(instance.parcels));
}

}  // namespace hubspoke
