#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "hubspoke/error.hpp"
#include "hubspoke/vrptw.hpp"
#include "text.hpp"

namespace hubspoke {

namespace {

constexpr double kKmPerDegree = kEarthRadiusKm * std::numbers::pi / 180.0;

std::vector<double> numbers_in(std::string_view line) {
  std::vector<double> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) {
    auto v = detail::parse_double(tok);
    if (!v) return {};
    out.push_back(*v);
  }
  return out;
}

}  // namespace

VrptwProblem parse_solomon(std::string_view text, FleetCost cost) {
  const auto lines = detail::split_lines(text);
  double capacity = -1.0;
  std::size_t i = 0;
  for (; i < lines.size(); ++i) {
    if (lines[i].find("CAPACITY") != std::string_view::npos) {
      for (++i; i < lines.size(); ++i) {
        auto nums = numbers_in(lines[i]);
        if (nums.size() == 2) {
          capacity = nums[1];
          break;
        }
        if (!detail::trim(lines[i]).empty()) break;
      }
      break;
    }
  }
  if (capacity <= 0.0) fail(ErrorCode::validation, "solomon: missing VEHICLE NUMBER/CAPACITY line");

  for (; i < lines.size(); ++i) {
    if (lines[i].find("CUST") != std::string_view::npos) break;
  }
  if (i == lines.size()) fail(ErrorCode::validation, "solomon: missing CUSTOMER table");

  struct Row {
    double x, y, demand, ready, due, service;
  };
  std::vector<Row> rows;
  for (++i; i < lines.size(); ++i) {
    const auto line = detail::trim(lines[i]);
    // Column headings ("CUST NO.  XCOORD. ...") are not numeric.
    if (line.empty() || !(std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-')) continue;
    auto nums = numbers_in(line);
    if (nums.size() != 7) {
      fail(ErrorCode::validation, fmt::format("solomon: line {}: expected 7 numbers", i + 1));
    }
    rows.push_back(Row{nums[1], nums[2], nums[3], nums[4], nums[5], nums[6]});
  }
  if (rows.empty()) fail(ErrorCode::validation, "solomon: no depot row");

  auto to_geo = [](const Row& r) { return GeoPoint{r.y / kKmPerDegree, r.x / kKmPerDegree}; };
  const std::size_t n = rows.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      dist[a * n + b] = std::hypot(rows[a].x - rows[b].x, rows[a].y - rows[b].y);
    }
  }

  VrptwProblem p;
  p.depot = to_geo(rows[0]);
  for (std::size_t r = 1; r < n; ++r) {
    p.stops.push_back(Stop{fmt::format("{}", r), to_geo(rows[r]), rows[r].demand, rows[r].ready,
                           rows[r].due, rows[r].service});
  }
  p.matrix = TravelMatrix::from_values(n, dist, dist);
  p.capacity = capacity;
  p.fleet_cost = cost;
  p.shift_start = rows[0].ready;
  p.shift_end = rows[0].due;
  validate(p);
  return p;
}

std::string to_solomon(const VrptwProblem& problem, std::string_view name) {
  const double cos_lat = std::cos(problem.depot.lat * std::numbers::pi / 180.0);
  auto project = [&](const GeoPoint& g) {
    return std::pair{(g.lon - problem.depot.lon) * cos_lat * kKmPerDegree,
                     (g.lat - problem.depot.lat) * kKmPerDegree};
  };
  std::string out = fmt::format("{}\n\nVEHICLE\nNUMBER     CAPACITY\n  {}         {}\n\n", name,
                                std::max<std::size_t>(1, problem.stops.size()),
                                detail::format_double(problem.capacity));
  out += "CUSTOMER\nCUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME\n\n";
  auto row = [&](std::size_t id, const GeoPoint& g, double demand, double ready, double due,
                 double service) {
    const auto [x, y] = project(g);
    out += fmt::format("{:5} {:10.4f} {:10.4f} {:10} {:10} {:10} {:10}\n", id, x, y,
                       detail::format_double(demand), detail::format_double(ready),
                       detail::format_double(due), detail::format_double(service));
  };
  row(0, problem.depot, 0.0, problem.shift_start, problem.shift_end, 0.0);
  for (std::size_t i = 0; i < problem.stops.size(); ++i) {
    const auto& s = problem.stops[i];
    row(i + 1, s.location, s.demand, s.earliest, s.latest, s.service_min);
  }
  return out;
}

}  // namespace hubspoke
