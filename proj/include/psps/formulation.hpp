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

// Day-ahead unit commitment with line de-energization under a wildfire
// risk budget, written as a MILP.
//
// Conventions used throughout:
//   * Flow on line l = (i, j) is B_l (theta_i - theta_j), positive from i
//     to j. Open lines decouple the angles through a big-M pair scaled by
//     the angle bound.
//   * Served load is modeled as s = x * demand in MW so that changing the
//     demand only moves variable bounds; the unserved fraction is recovered
//     as x = s / demand.
//   * Line z(t) is 1 while energized. z_dn(t) = z(t-1) - z(t) with z(0) = 1.
//   * First-stage binaries are shared by all scenarios; dispatch is per
//     scenario.

#ifndef PSPS_FORMULATION_HPP_
#define PSPS_FORMULATION_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psps/grid_model.hpp"
#include "psps/matrix.hpp"
#include "psps/milp/model.hpp"
#include "psps/milp/solver.hpp"
#include "psps/risk_pipeline.hpp"
#include "psps/scenario_engine.hpp"

namespace psps {

enum class BudgetMode { kNone, kWfpiSum, kNMinusK, kWfpiSlack, kLogWip };

// How de-energized lines enter the LogWip budget.
enum class LogWipForm {
  // (1 - z) ln(pi) + z ln(1 - pi) at every step.
  kCumulative,
  // z_dn ln(pi) + z ln(1 - pi): the dark line's term counts only at its
  // shutdown step.
  kShutdownStep,
};

BudgetMode parse_budget_mode(std::string_view s);
const char* to_string(BudgetMode m);
LogWipForm parse_log_wip_form(std::string_view s);
const char* to_string(LogWipForm f);

struct RiskBudget {
  BudgetMode mode = BudgetMode::kNone;
  double r_tol = 0.0;        // WfpiSum, WfpiSlack
  int k = 0;                 // NMinusK
  double pi_tol = 1.0;       // LogWip
  double r_slack_max = 0.0;  // WfpiSlack
  double slack_penalty = 1.0;
  LogWipForm log_form = LogWipForm::kCumulative;
};

// Throws ConfigError when the fields of the chosen mode are out of range.
void validate_budget(const RiskBudget& budget, int num_lines);

struct CvarConfig {
  double beta = 0.0;
  double epsilon = 0.95;
};

// First-stage decisions. Matrices are entity x step with 0/1 entries.
struct CommitmentPlan {
  Matrix<std::int8_t> gen_on, gen_up, gen_down;
  Matrix<std::int8_t> line_on, line_down;

  int horizon() const { return gen_on.cols() > 0 ? gen_on.cols() : line_on.cols(); }
};

// All generators at `on`, all lines energized, with consistent transitions.
CommitmentPlan uniform_plan(const PowerNetwork& net, bool on);
// Recomputes gen_up/gen_down and line_down from gen_on and line_on.
void derive_transitions(CommitmentPlan& plan, const PowerNetwork& net);

struct ScenarioDispatch {
  Matrix<double> p_gen;   // generators x steps, MW
  Matrix<double> p_aux;   // p_gen - p_max * z
  Matrix<double> flow;    // lines x steps, MW
  Matrix<double> theta;   // buses x steps, rad
  Matrix<double> served;  // demands x steps, fraction x in [0,1]
  Matrix<double> spill;   // buses x steps, MW (recourse only)
};

struct DispatchSolution {
  std::vector<ScenarioDispatch> scenarios;
};

struct CostBreakdown {
  double uc = 0.0;
  double oc = 0.0;    // probability weighted
  double voll = 0.0;  // probability weighted
  double spill = 0.0;
  double slack_penalty = 0.0;
  double total = 0.0;  // uc + oc + voll + spill + slack_penalty
  std::vector<double> per_scenario;  // Pi per scenario
  std::vector<double> probabilities;
  double mean = 0.0;
  double cvar = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
  // (1 - beta) mean + beta cvar + slack penalty.
  double mean_cvar_objective = 0.0;
};

// Variable indices of a built model; -1 where a family is absent.
struct ScenarioVars {
  Matrix<int> p_gen, p_aux, flow, theta, served, spill;
};

struct ModelIndex {
  Matrix<int> gen_on, gen_up, gen_down, line_on, line_down;
  std::vector<int> slack;  // WfpiSlack, per step
  int nu = -1;
  std::vector<int> gamma;
  std::vector<ScenarioVars> scenarios;
  std::vector<int> budget_rows;
  int first_step = 0;
  int last_step = 0;  // exclusive
};

struct BuildOptions {
  double theta_bound = 0.6;
  std::optional<CvarConfig> cvar;
  // Fix every first-stage binary to this plan and omit UC, persistence and
  // budget rows (they involve constants only).
  const CommitmentPlan* fixed_plan = nullptr;
  // Per-bus spill variables penalized at `spill_penalty` $/MWh.
  bool spill = false;
  double spill_penalty = 1000.0;
  // Restrict dispatch to steps [first_step, last_step). Windows after the
  // first take `initial_aux` (p_aux at first_step - 1) as ramp origin.
  // Requires a fixed plan when not covering the whole horizon.
  int first_step = 0;
  int last_step = -1;
  std::vector<double> initial_aux;
  // Drop the uc term from the objective (used by the receding horizon,
  // which charges it once).
  bool include_uc = true;
};

struct DayAheadModel {
  milp::MilpModel model;
  ModelIndex index;
};

// Budget rows use `budget_lines` (one per network line, in order). Throws
// ModelTooLarge above the engine cap and ConfigError on budget or CVaR
// mismatches.
DayAheadModel build_day_ahead(const PowerNetwork& net, const ScenarioSet& scenarios,
                              const RiskBudget& budget,
                              const std::vector<LineRisk>& budget_lines,
                              const BuildOptions& options = {});

// Adds the budget rows for steps [first, last) and returns their indices.
// Zero-risk lines are left out of LogWip sums.
std::vector<int> emit_risk_budget(const std::vector<LineRisk>& lines, const RiskBudget& budget,
                                  milp::MilpModel& model, ModelIndex& index, int first,
                                  int last);

// Lines used by the budget for a scenario set: the probability-weighted
// mean risk per line, with `line_metric` (may be empty) as the WFPI value.
std::vector<LineRisk> budget_line_risk(const PowerNetwork& net, const ScenarioSet& scenarios,
                                       const std::vector<double>& line_metric);

CommitmentPlan extract_plan(const DayAheadModel& m, const std::vector<double>& x,
                            const PowerNetwork& net);
DispatchSolution extract_dispatch(const DayAheadModel& m, const std::vector<double>& x,
                                  const PowerNetwork& net, const ScenarioSet& scenarios);

// Costs over the full horizon. Spill is charged at `spill_penalty`.
// Throws DimensionMismatch on inconsistent shapes.
CostBreakdown evaluate_costs(const PowerNetwork& net, const CommitmentPlan& plan,
                             const DispatchSolution& dispatch, const ScenarioSet& scenarios,
                             const std::optional<CvarConfig>& cvar = std::nullopt,
                             double slack_cost = 0.0, double spill_penalty = 1000.0);

struct DayAheadResult {
  milp::SolveStatus status = milp::SolveStatus::kInfeasible;
  CommitmentPlan plan;
  DispatchSolution dispatch;
  CostBreakdown costs;
  double objective = 0.0;
  double gap = 0.0;
  long nodes = 0;
  int num_variables = 0;
  int num_constraints = 0;
  int num_binaries = 0;
};

// Binaries of `plan` laid out as a start vector for `dm` (continuous
// entries zero).
std::vector<double> plan_start_vector(const DayAheadModel& dm, const CommitmentPlan& plan);

// Builds, solves and extracts. Throws SolveFailed when no feasible plan is
// found; the message names the risk budget when dropping it restores
// feasibility. `start`, when given, seeds the search; otherwise budgeted
// models are seeded by a relax-and-fix heuristic.
DayAheadResult solve_day_ahead(const PowerNetwork& net, const ScenarioSet& scenarios,
                               const RiskBudget& budget,
                               const std::vector<LineRisk>& budget_lines,
                               const BuildOptions& options = {},
                               const milp::SolveLimits& limits = {},
                               const CommitmentPlan* start = nullptr);

// Penalty of the WfpiSlack slack implied by a fixed plan; 0 for other
// modes.
double budget_slack_cost(const CommitmentPlan& plan, const RiskBudget& budget,
                         const std::vector<LineRisk>& lines);

// Summaries of a plan.
int energized_risky_lines(const CommitmentPlan& plan, const std::vector<LineRisk>& lines, int t);
double mean_nzr_active_lines(const CommitmentPlan& plan, const std::vector<LineRisk>& lines);
// Probability-weighted MWh served.
double demand_served_mwh(const PowerNetwork& net, const DispatchSolution& dispatch,
                         const ScenarioSet& scenarios);

// Exports.
std::string plan_to_json(const CommitmentPlan& plan, const PowerNetwork& net);
CommitmentPlan parse_plan(const std::string& text, const PowerNetwork& net);
std::string commitments_csv(const CommitmentPlan& plan, const PowerNetwork& net);
std::string energizations_csv(const CommitmentPlan& plan, const PowerNetwork& net);
std::string dispatch_csv(const DispatchSolution& dispatch, const PowerNetwork& net);
std::string costs_to_json(const CostBreakdown& costs);

}  // namespace psps

#endif  // PSPS_FORMULATION_HPP_
