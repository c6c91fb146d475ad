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

// Real-time evaluation of a fixed day-ahead plan against sampled line
// outages and realized demand.

#ifndef PSPS_RT_EVALUATOR_HPP_
#define PSPS_RT_EVALUATOR_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psps/formulation.hpp"
#include "psps/grid_model.hpp"
#include "psps/matrix.hpp"
#include "psps/risk_pipeline.hpp"

namespace psps {

enum class OnsetMode {
  // An ignited line fails from a uniformly drawn step onward.
  kUniform,
  // An ignited line is out for the whole day.
  kWholeDay,
};

OnsetMode parse_onset_mode(std::string_view s);
const char* to_string(OnsetMode m);

struct OutageScenario {
  int id = 0;
  double probability = 1.0;
  Matrix<std::int8_t> available;  // lines x steps
  Matrix<double> demand;          // demands x steps, MW
};

// Draws `n` equiprobable outage samples. Each line takes one Bernoulli(pi)
// draw per sample from a stream seeded by (seed, sample id); a failure
// removes the line from its onset step on. Availability never exceeds the
// plan's energization. Throws ValidationError when n < 1.
std::vector<OutageScenario> sample_outages(const std::vector<LineRisk>& lines,
                                           const CommitmentPlan& plan, int n,
                                           std::uint64_t seed, const Matrix<double>& demand,
                                           OnsetMode onset = OnsetMode::kUniform);

// Cross product of outage samples with weighted demand realizations.
std::vector<OutageScenario> with_demand_set(const std::vector<OutageScenario>& outages,
                                            const std::vector<Matrix<double>>& demands,
                                            const std::vector<double>& weights);

struct RecourseOptions {
  double theta_bound = 0.6;
  bool spill = true;
  double spill_penalty = 1000.0;
};

struct RecourseResult {
  ScenarioDispatch dispatch;
  double cost = 0.0;  // uc + oc + voll + spill
  double uc = 0.0;
  double oc = 0.0;
  double voll = 0.0;
  double spill = 0.0;
  double served_mwh = 0.0;
};

// Dispatch LP with the plan's commitments and the scenario's line
// availability fixed. The plan's uc is charged as a sunk cost.
RecourseResult solve_recourse(const PowerNetwork& net, const CommitmentPlan& plan,
                              const OutageScenario& scenario,
                              const RecourseOptions& options = {});

struct RecedingOptions {
  int window = 1;
  // Extend windows past the horizon by holding the last demand and plan
  // column instead of truncating them.
  bool pad = false;
  RecourseOptions recourse;
};

// Solves one window per step, keeps its first step and carries the ramp
// state forward.
RecourseResult receding_horizon_run(const PowerNetwork& net, const CommitmentPlan& plan,
                                    const OutageScenario& scenario,
                                    const RecedingOptions& options);

// (step_hours / H) * sum_t sum_g p_max z, in MW.
double average_available_generation(const PowerNetwork& net, const CommitmentPlan& plan);

// Risk of the end-of-day line state: sum over risky lines of
// (1 - a) ln pi + a ln(1 - pi), with a the availability at the last step.
double realized_risk(const std::vector<LineRisk>& lines, const Matrix<std::int8_t>& available);

struct RtOptions {
  int samples = 1000;
  std::uint64_t seed = 0;
  OnsetMode onset = OnsetMode::kUniform;
  RecourseOptions recourse;
  // One-shot recourse when absent.
  std::optional<RecedingOptions> receding;
  // 0 uses the hardware concurrency.
  int threads = 0;
};

struct RtReport {
  std::vector<double> costs;  // per scenario
  std::vector<double> probabilities;
  std::vector<double> risks;  // realized risk per scenario
  std::vector<double> served_mwh;
  double expected_cost = 0.0;
  double cost_p05 = 0.0;
  double cost_p50 = 0.0;
  double cost_p95 = 0.0;
  double uc = 0.0;
  double expected_oc = 0.0;
  double expected_voll = 0.0;
  double expected_spill = 0.0;
  double expected_risk = 0.0;
  double plan_risk = 0.0;  // realized_risk of the plan itself
  double expected_served_mwh = 0.0;
  double aag_mw = 0.0;
  int samples = 0;
  int distinct_patterns = 0;
  OnsetMode onset = OnsetMode::kUniform;
  bool receding = false;
};

// Evaluates the plan on the given scenarios.
RtReport evaluate_scenarios(const PowerNetwork& net, const CommitmentPlan& plan,
                            const std::vector<LineRisk>& rt_lines,
                            const std::vector<OutageScenario>& scenarios,
                            const RtOptions& options = {});

// Samples outages against `demand` and evaluates the plan on them.
RtReport evaluate_real_time(const PowerNetwork& net, const CommitmentPlan& plan,
                            const std::vector<LineRisk>& rt_lines, const Matrix<double>& demand,
                            const RtOptions& options = {});

// Probability-weighted lower quantile.
double weighted_quantile(const std::vector<double>& values, const std::vector<double>& probs,
                         double q);

std::string rt_report_to_json(const RtReport& report);
std::string rt_scenarios_csv(const RtReport& report);

}  // namespace psps

#endif  // PSPS_RT_EVALUATOR_HPP_
