#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hubspoke/fcm.hpp"
#include "hubspoke/scenarios.hpp"

namespace hubspoke {

enum class ReportFormat { csv, json, markdown };

ReportFormat parse_format(std::string_view text);

/// Absolute figures of one solved scenario.
struct ScenarioTotals {
  ScenarioId scenario = ScenarioId::S0;
  std::size_t trucks = 0;
  double total_cost = 0.0;
  double pickup_cost = 0.0;
  double delivery_cost = 0.0;

  friend bool operator==(const ScenarioTotals&, const ScenarioTotals&) = default;
};

ScenarioTotals totals_of(const ScenarioResult& result);

/// Ratios are relative to S0: trucks to S0 trucks, every cost to S0 total cost.
struct ComparisonRow {
  ScenarioId scenario = ScenarioId::S0;
  std::size_t trucks = 0;
  double trucks_ratio = 0.0;
  double total_cost = 0.0;
  double total_ratio = 0.0;
  double pickup_cost = 0.0;
  double pickup_ratio = 0.0;
  double delivery_cost = 0.0;
  double delivery_ratio = 0.0;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct ScenarioComparison {
  std::vector<ComparisonRow> rows;  // S0..S3 order
  ScenarioTotals baseline;
  std::string cost_attribution{kCostAttribution};

  friend bool operator==(const ScenarioComparison&, const ScenarioComparison&) = default;
};

inline constexpr std::string_view kComparisonColumns =
    "scenario,trucks,trucks_ratio,total_cost,total_ratio,pickup_cost,pickup_ratio,delivery_cost,"
    "delivery_ratio";

/// Throws a validation error naming S0 when the baseline is missing.
ScenarioComparison compare_scenarios(const std::map<ScenarioId, ScenarioTotals>& totals);
ScenarioComparison compare_scenarios(const std::map<ScenarioId, ScenarioResult>& results);

/// Ratios at 2 decimals; machine formats keep absolutes at full precision,
/// markdown rounds money to 0.01.
std::string render(const ScenarioComparison& comparison, ReportFormat format);

/// Cluster-count sweep: c, ordered and unordered approximate cost (km),
/// their two terms, partition coefficient, and demand CV.
std::string render(const std::vector<SweepRow>& sweep, ReportFormat format);

/// Reads back the table written by render(comparison, markdown).
std::vector<ComparisonRow> parse_markdown_comparison(std::string_view text);

}  // namespace hubspoke
