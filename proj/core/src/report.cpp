#include "hubspoke/report.hpp"

#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hubspoke/error.hpp"
#include "text.hpp"

namespace hubspoke {

ReportFormat parse_format(std::string_view text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  if (text == "markdown" || text == "md") return ReportFormat::markdown;
  fail(ErrorCode::validation, fmt::format("unknown format '{}' (expected csv|json|markdown)", text));
}

ScenarioTotals totals_of(const ScenarioResult& r) {
  return ScenarioTotals{r.scenario, r.trucks_used, r.total_cost, r.pickup_cost, r.delivery_cost};
}

ScenarioComparison compare_scenarios(const std::map<ScenarioId, ScenarioTotals>& totals) {
  const auto base_it = totals.find(ScenarioId::S0);
  if (base_it == totals.end()) {
    fail(ErrorCode::validation, "comparison needs the S0 baseline plan (missing S0)");
  }
  const auto& base = base_it->second;
  if (base.trucks == 0 || !(base.total_cost > 0.0)) {
    fail(ErrorCode::validation, "S0 baseline has zero trucks or zero cost; ratios undefined");
  }
  ScenarioComparison cmp;
  cmp.baseline = base;
  for (const auto& [id, t] : totals) {
    ComparisonRow row;
    row.scenario = id;
    row.trucks = t.trucks;
    row.trucks_ratio = static_cast<double>(t.trucks) / static_cast<double>(base.trucks);
    row.total_cost = t.total_cost;
    row.total_ratio = t.total_cost / base.total_cost;
    row.pickup_cost = t.pickup_cost;
    row.pickup_ratio = t.pickup_cost / base.total_cost;
    row.delivery_cost = t.delivery_cost;
    row.delivery_ratio = t.delivery_cost / base.total_cost;
    cmp.rows.push_back(row);
  }
  return cmp;
}

ScenarioComparison compare_scenarios(const std::map<ScenarioId, ScenarioResult>& results) {
  std::map<ScenarioId, ScenarioTotals> totals;
  for (const auto& [id, r] : results) totals.emplace(id, totals_of(r));
  return compare_scenarios(totals);
}

namespace {

std::string ratio(double v) { return fmt::format("{:.2f}", v); }
double rounded_ratio(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

std::string render(const ScenarioComparison& cmp, ReportFormat format) {
  switch (format) {
    case ReportFormat::csv: {
      std::string out = std::string(kComparisonColumns) + "\n";
      for (const auto& r : cmp.rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", to_string(r.scenario), r.trucks,
                           ratio(r.trucks_ratio), detail::format_double(r.total_cost),
                           ratio(r.total_ratio), detail::format_double(r.pickup_cost),
                           ratio(r.pickup_ratio), detail::format_double(r.delivery_cost),
                           ratio(r.delivery_ratio));
      }
      return out;
    }
    case ReportFormat::json: {
      nlohmann::ordered_json j;
      j["cost_attribution"] = cmp.cost_attribution;
      j["baseline"] = {{"scenario", to_string(cmp.baseline.scenario)},
                       {"trucks", cmp.baseline.trucks},
                       {"total_cost", cmp.baseline.total_cost},
                       {"pickup_cost", cmp.baseline.pickup_cost},
                       {"delivery_cost", cmp.baseline.delivery_cost}};
      j["rows"] = nlohmann::ordered_json::array();
      for (const auto& r : cmp.rows) {
        j["rows"].push_back({{"scenario", to_string(r.scenario)},
                             {"trucks", r.trucks},
                             {"trucks_ratio", rounded_ratio(r.trucks_ratio)},
                             {"total_cost", r.total_cost},
                             {"total_ratio", rounded_ratio(r.total_ratio)},
                             {"pickup_cost", r.pickup_cost},
                             {"pickup_ratio", rounded_ratio(r.pickup_ratio)},
                             {"delivery_cost", r.delivery_cost},
                             {"delivery_ratio", rounded_ratio(r.delivery_ratio)}});
      }
      return j.dump(2) + "\n";
    }
    case ReportFormat::markdown: {
      std::string out =
          "| scenario | trucks | trucks_ratio | total_cost | total_ratio | pickup_cost | "
          "pickup_ratio | delivery_cost | delivery_ratio |\n"
          "|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";
      for (const auto& r : cmp.rows) {
        out += fmt::format("| {} | {} | {} | {:.2f} | {} | {:.2f} | {} | {:.2f} | {} |\n",
                           to_string(r.scenario), r.trucks, ratio(r.trucks_ratio), r.total_cost,
                           ratio(r.total_ratio), r.pickup_cost, ratio(r.pickup_ratio),
                           r.delivery_cost, ratio(r.delivery_ratio));
      }
      out += fmt::format("\nRatios are relative to S0 (trucks to S0 trucks, costs to S0 total cost). "
                         "Cost attribution: {}.\n",
                         cmp.cost_attribution);
      return out;
    }
  }
  return {};
}

std::string render(const std::vector<SweepRow>& sweep, ReportFormat format) {
  switch (format) {
    case ReportFormat::csv: {
      std::string out =
          "c,approx_cost_km,approx_cost_unordered_km,interhub_km,intracluster_km,fpc,demand_cv\n";
      for (const auto& r : sweep) {
        out += fmt::format("{},{},{},{},{},{},{}\n", r.c, detail::format_double(r.metrics.approx_cost_km),
                           detail::format_double(r.metrics.approx_cost_unordered_km()),
                           detail::format_double(r.metrics.interhub_km),
                           detail::format_double(r.metrics.intracluster_km),
                           detail::format_double(r.fpc), detail::format_double(r.metrics.demand_cv));
      }
      return out;
    }
    case ReportFormat::json: {
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const auto& r : sweep) {
        rows.push_back({{"c", r.c},
                        {"approx_cost_km", r.metrics.approx_cost_km},
                        {"approx_cost_unordered_km", r.metrics.approx_cost_unordered_km()},
                        {"interhub_km", r.metrics.interhub_km},
                        {"intracluster_km", r.metrics.intracluster_km},
                        {"fpc", r.fpc},
                        {"demand_cv", r.metrics.demand_cv},
                        {"cluster_sizes", r.metrics.cluster_sizes},
                        {"iterations_run", r.clustering.iterations_run},
                        {"converged", r.clustering.converged}});
      }
      return nlohmann::ordered_json{{"rows", rows}}.dump(2) + "\n";
    }
    case ReportFormat::markdown: {
      std::string out =
          "| Number of clusters | Approximate transportation cost (km) | Unordered-pair variant (km) "
          "| Coef | Demand CV |\n|---:|---:|---:|---:|---:|\n";
      for (const auto& r : sweep) {
        out += fmt::format("| {} | {:.1f} | {:.1f} | {:.3f} | {:.3f} |\n", r.c,
                           r.metrics.approx_cost_km, r.metrics.approx_cost_unordered_km(), r.fpc,
                           r.metrics.demand_cv);
      }
      out += "\nThe approximate cost sums centroid distances over ordered pairs (each pair twice); "
             "the unordered-pair variant counts each pair once.\n";
      return out;
    }
  }
  return {};
}

std::vector<ComparisonRow> parse_markdown_comparison(std::string_view text) {
  std::vector<ComparisonRow> rows;
  for (auto line : detail::split_lines(text)) {
    line = detail::trim(line);
    if (!line.starts_with("| S")) continue;
    std::vector<std::string> cells;
    std::size_t start = 1;
    while (start < line.size()) {
      const auto bar = line.find('|', start);
      if (bar == std::string_view::npos) break;
      cells.emplace_back(detail::trim(line.substr(start, bar - start)));
      start = bar + 1;
    }
    if (cells.size() != 9) fail(ErrorCode::validation, "markdown row does not have 9 cells");
    auto num = [&](std::size_t i) {
      auto v = detail::parse_double(cells[i]);
      if (!v) fail(ErrorCode::validation, fmt::format("markdown cell '{}' is not a number", cells[i]));
      return *v;
    };
    ComparisonRow r;
    r.scenario = parse_scenario(cells[0]);
    r.trucks = static_cast<std::size_t>(num(1));
    r.trucks_ratio = num(2);
    r.total_cost = num(3);
    r.total_ratio = num(4);
    r.pickup_cost = num(5);
    r.pickup_ratio = num(6);
    r.delivery_cost = num(7);
    r.delivery_ratio = num(8);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace hubspoke
