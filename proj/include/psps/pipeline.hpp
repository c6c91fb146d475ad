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

// Run configuration and the stages shared by the command-line tool:
// ingestion, scenario construction, day-ahead solve, real-time simulation,
// sweeps and analyses. Relative paths in a config resolve against the
// config file's directory.

#ifndef PSPS_PIPELINE_HPP_
#define PSPS_PIPELINE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psps/analytics.hpp"
#include "psps/formulation.hpp"
#include "psps/grid_model.hpp"
#include "psps/risk_pipeline.hpp"
#include "psps/rt_evaluator.hpp"
#include "psps/scenario_engine.hpp"

namespace psps {

const char* tool_version();

// Where a line-risk list comes from: a saved line-risk JSON or a raster
// mapped through the metric's reliability table.
struct RiskSource {
  std::filesystem::path line_risk;
  std::filesystem::path raster;
  bool empty() const { return line_risk.empty() && raster.empty(); }
};

struct MetricConfig {
  std::filesystem::path reliability_table;
  LineAggregation aggregation = LineAggregation::kCellProduct;
  RiskSource day_ahead;
  RiskSource real_time;  // falls back to day_ahead
};

enum class ScenarioMode { kDeterministic, kStochastic };

struct SolverConfig {
  double relative_gap = 1e-4;
  long max_nodes = 200000;
  double time_limit_seconds = 0.0;  // 0 means none
  milp::SolveLimits limits() const;
};

struct RtConfig {
  std::filesystem::path realized_demand;  // network base profiles when empty
  std::filesystem::path plan;             // simulate-rt input
  int samples = 1000;
  OnsetMode onset = OnsetMode::kUniform;
  int receding_window = 0;  // 0 selects the one-shot recourse
  bool pad = false;
  double spill_penalty = 1000.0;
  int threads = 0;
};

struct SweepConfig {
  std::vector<double> pi_tol;
  // Alternatively, tolerances admitting at most this many risky lines.
  std::vector<int> nzr_targets;
};

struct AnalysisConfig {
  std::filesystem::path fires;
  double min_acres = 500.0;
  int clusters = 6;
  int years = 20;
  // Monthly WIP per bus (bus,m1..m12) for the two metrics being compared.
  std::filesystem::path wip_a;
  std::filesystem::path wip_b;
  std::string label_a = "wfpi";
  std::string label_b = "wlfp";
};

struct RunConfig {
  std::filesystem::path base_dir;
  std::filesystem::path network;
  Metric metric = Metric::kWlfp;
  std::array<std::optional<MetricConfig>, 2> risk;  // indexed by Metric
  ScenarioMode scenario_mode = ScenarioMode::kDeterministic;
  ScenarioOptions scenario_options;
  std::filesystem::path history_demand;
  std::filesystem::path history_risk;
  RiskBudget budget;
  CvarConfig cvar;
  double theta_bound = 0.6;
  bool spill = false;
  SolverConfig solver;
  RtConfig rt;
  SweepConfig sweep;
  AnalysisConfig analysis;
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  // Canonical JSON of the effective configuration (after overrides).
  std::string canonical;

  const MetricConfig& metric_config() const;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<Metric> metric;
  std::optional<std::filesystem::path> out;
  std::optional<OnsetMode> onset;
};

// Throws ConfigError on schema problems and ParseError on malformed JSON or
// a missing file.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const ConfigOverrides& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path,
                          const ConfigOverrides& overrides = {});

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Stage inputs.
PowerNetwork load_config_network(const RunConfig& config);
std::vector<LineRisk> load_line_risk(const RunConfig& config, const PowerNetwork& net,
                                     bool real_time, SanitizeCounters* counters = nullptr);
Matrix<double> load_realized_demand(const RunConfig& config, const PowerNetwork& net);

// Tolerance for the cumulative LogWip budget under which at most `k` risky
// lines can stay energized: the geometric mean of the largest state
// probability with k lines energized and the smallest with k + 1. Throws
// ConfigError when the line probabilities are too spread out for such a
// tolerance to exist.
double pi_tol_for_active_lines(const std::vector<LineRisk>& lines, int k, int step = 0);

// Scenario set and budget lines for the day-ahead solve. Deterministic
// mode uses the network base profiles and the day-ahead line risk; the
// stochastic mode builds the scenario fan from history.
struct DayAheadInputs {
  ScenarioSet scenarios;
  std::vector<LineRisk> budget_lines;
};

DayAheadInputs build_day_ahead_inputs(const RunConfig& config, const PowerNetwork& net,
                                      const std::vector<LineRisk>& day_ahead);

BuildOptions build_options(const RunConfig& config);

DayAheadResult run_day_ahead(const RunConfig& config, const PowerNetwork& net,
                             const DayAheadInputs& inputs, const RiskBudget& budget,
                             const CommitmentPlan* start = nullptr);

RtOptions rt_options(const RunConfig& config);

// Artifacts.
std::vector<std::string> write_day_ahead_artifacts(const std::filesystem::path& dir,
                                                   const PowerNetwork& net,
                                                   const DayAheadInputs& inputs,
                                                   const DayAheadResult& result);
std::vector<std::string> write_rt_artifacts(const std::filesystem::path& dir,
                                            const RtReport& report);
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const RunConfig& config, const std::vector<std::string>& artifacts);

struct SweepRow {
  int point = 0;
  double pi_tol = 1.0;
  int nzr_target = -1;
  std::string status = "ok";
  double nzr_active_lines = 0.0;
  double da_cost = 0.0;
  double rt_cost = 0.0;
  double served_mwh = 0.0;
  double aag_mw = 0.0;
  double rt_risk = 0.0;
  double plan_risk = 0.0;
};

// Solves and simulates every grid point. With a non-empty `out`, each
// point gets a subdirectory and a summary.csv is written. `progress` is
// called after each point.
std::vector<SweepRow> run_sweep(const RunConfig& config, const PowerNetwork& net,
                                const DayAheadInputs& inputs,
                                const std::vector<LineRisk>& real_time,
                                const Matrix<double>& realized_demand,
                                const std::filesystem::path& out,
                                const std::function<void(const SweepRow&)>& progress = {});
std::string sweep_summary_csv(const std::vector<SweepRow>& rows);

// Network base profiles as a demands x steps matrix.
Matrix<double> base_demand(const PowerNetwork& net);

// Monthly series CSV: id,m1,...,m12 (one row per bus or cluster).
Matrix<double> parse_monthly_csv(const std::string& text, const std::string& what);

}  // namespace psps

#endif  // PSPS_PIPELINE_HPP_
