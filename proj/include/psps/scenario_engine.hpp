// Copyright 2026 The psps-planner Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PSPS_SCENARIO_ENGINE_HPP_
#define PSPS_SCENARIO_ENGINE_HPP_

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "psps/grid_model.hpp"
#include "psps/matrix.hpp"
#include "psps/risk_pipeline.hpp"

namespace psps {

enum class ScenarioKind { kDayAhead, kRealTime };

struct Scenario {
  int id = 0;
  double probability = 1.0;
  // demands x horizon, in network demand order.
  Matrix<double> demand;
  // One probability per line in network order, constant over the day.
  std::vector<double> line_pi;
};

struct ScenarioSet {
  ScenarioKind kind = ScenarioKind::kDayAhead;
  std::vector<Scenario> scenarios;

  int size() const { return static_cast<int>(scenarios.size()); }
};

// Throws ValidationError on non-positive probabilities, probabilities not
// summing to 1 within 1e-9, negative demand, risk outside [0,1), or
// dimensions that disagree with `net`.
void validate_scenario_set(const ScenarioSet& set, const PowerNetwork& net);

// Per-line LineRisk list for one scenario over `horizon` steps.
std::vector<LineRisk> scenario_line_risk(const Scenario& s, const PowerNetwork& net);

struct HistoryDay {
  std::string date;
  std::vector<double> total_demand;  // MW per step
  double cumulative_bus_risk = 0.0;
  std::vector<double> line_metric;  // raw metric per line, network order
};

struct ReducedScenarios {
  std::vector<int> days;  // indices into the history, ascending
  std::vector<double> probabilities;
};

// Backward reduction over whole days. Each day starts with probability
// 1/n; the day with the smallest probability times distance to its nearest
// survivor is removed and its mass moved to that survivor, until `k`
// remain. Distance is Euclidean over per-step z-scored demand and z-scored
// cumulative risk. Ties go to the lowest index. Throws InsufficientHistory.
ReducedScenarios reduce_scenarios(const std::vector<HistoryDay>& history, int k);

enum class FanProbabilityMode { kNormalPartition, kTree };

FanProbabilityMode parse_fan_mode(std::string_view s);
const char* to_string(FanProbabilityMode m);

struct FanCurve {
  double offset = 0.0;  // multiples of sigma: -2, -1, 0, 1, 2
  std::vector<double> total_demand;
  double probability = 0.0;
};

// Standard normal mass of {(-inf,-1.5], (-1.5,-0.5], (-0.5,0.5], (0.5,1.5],
// (1.5,inf)}.
std::array<double, 5> normal_partition();

// Five curves mu + k sigma (k = -2..2, clipped at 0) from the per-step
// sample mean and standard deviation. Throws InsufficientHistory when
// fewer than two days are given.
std::vector<FanCurve> gaussian_fan(const std::vector<HistoryDay>& history);

// Day whose cumulative risk is nearest `target`; ties go to the earliest
// date. Throws InsufficientHistory on an empty history.
const HistoryDay& match_risk_day(double target, const std::vector<HistoryDay>& history);

// p(d,t) = total(t) * peak(d) / sum of peaks. Throws ZeroTotal for an
// all-zero curve or when every base profile is zero.
Matrix<double> project_demand(const std::vector<double>& total_curve, const PowerNetwork& net);

// Probability-weighted elementwise mean of demand and line risk.
Scenario expected_scenario(const ScenarioSet& set);

// Probability of a line given a per-cell mean metric `m` over `cells`
// independent cells: 1 - (1 - wip(m))^cells.
double line_pi_from_metric(double m, int cells, const ReliabilityTable& table);

struct ScenarioOptions {
  int k = 5;
  FanProbabilityMode fan_mode = FanProbabilityMode::kNormalPartition;
};

// Day-ahead set: five fan curves projected onto the demands. Scenario k is
// paired with the historical day whose cumulative risk is nearest
// mean + offset_k * std of the history's cumulative risk, and takes that
// day's line metrics through `table`. `cells_per_line` gives the number of
// raster cells behind each line (1 when empty). In tree mode the fan
// probabilities are the reduced-day probabilities assigned by rank of
// total demand.
ScenarioSet build_day_ahead_scenarios(const PowerNetwork& net,
                                      const std::vector<HistoryDay>& history,
                                      const ReliabilityTable& table,
                                      const std::vector<int>& cells_per_line,
                                      const ScenarioOptions& options = {});

// Single-scenario set with the given demand and line risk.
ScenarioSet single_scenario(const Matrix<double>& demand, std::vector<double> line_pi,
                            ScenarioKind kind = ScenarioKind::kDayAhead);

// Demand history CSV: date,step,total_demand (steps 1..H). Risk history
// CSV: date,cumulative_bus_risk,line_<id>... (one row per date). Days are
// returned in date order; both files must cover the same dates.
std::vector<HistoryDay> load_history(const std::filesystem::path& demand_csv,
                                     const std::filesystem::path& risk_csv,
                                     const PowerNetwork& net);
std::vector<HistoryDay> parse_history(const std::string& demand_csv, const std::string& risk_csv,
                                      const PowerNetwork& net);

// Realized demand CSV: step,total_demand.
std::vector<double> parse_total_curve(const std::string& csv, int horizon);
std::vector<double> load_total_curve(const std::filesystem::path& path, int horizon);

std::string scenario_set_to_json(const ScenarioSet& set);
ScenarioSet parse_scenario_set(const std::string& text);

}  // namespace psps

#endif  // PSPS_SCENARIO_ENGINE_HPP_
