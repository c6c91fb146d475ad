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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "psps/analytics.hpp"
#include "psps/error.hpp"
#include "psps/formulation.hpp"
#include "support/fixtures.hpp"

using namespace psps;

namespace {

milp::SolveLimits exact() {
  milp::SolveLimits l;
  l.relative_gap = 0.0;
  return l;
}

// One bus, one generator, one load, no lines.
PowerNetwork single_bus(int horizon, double load, double startup) {
  PowerNetwork net;
  net.horizon = horizon;
  net.buses.push_back({1, "b1", 38.0, -120.0});
  Generator g;
  g.id = 1;
  g.bus = 1;
  g.p_max = 100.0;
  g.ramp_down = -100.0;
  g.ramp_up = 100.0;
  g.marginal_cost = 10.0;
  g.startup_cost = startup;
  net.generators.push_back(g);
  net.demands.push_back({1, 1, 1000.0, std::vector<double>(horizon, load)});
  return net;
}

// Generator at bus 1, load at bus 2, two parallel lines.
PowerNetwork parallel_lines() {
  PowerNetwork net = single_bus(1, 50.0, 0.0);
  net.buses.push_back({2, "b2", 37.0, -120.0});
  net.demands[0].bus = 2;
  for (int id = 1; id <= 2; ++id) {
    net.lines.push_back({id, 1, 2, 100.0, -80.0, 80.0, {}});
  }
  return net;
}

ScenarioSet base_scenario(const PowerNetwork& net, std::vector<double> line_pi) {
  Matrix<double> demand(net.num_demands(), net.horizon);
  for (int d = 0; d < net.num_demands(); ++d) {
    for (int t = 0; t < net.horizon; ++t) demand(d, t) = net.demands[d].base_profile[t];
  }
  return single_scenario(demand, std::move(line_pi));
}

ScenarioSet two_scenarios(const PowerNetwork& net, std::vector<double> line_pi, double scale) {
  ScenarioSet s = base_scenario(net, line_pi);
  Scenario high = s.scenarios[0];
  high.id = 2;
  for (int d = 0; d < high.demand.rows(); ++d) {
    for (int t = 0; t < high.demand.cols(); ++t) high.demand(d, t) *= scale;
  }
  s.scenarios[0].probability = 0.6;
  high.probability = 0.4;
  s.scenarios.push_back(high);
  return s;
}

std::vector<LineRisk> risks(const PowerNetwork& net, const std::vector<double>& pi,
                            const std::vector<double>& metric = {}) {
  std::vector<LineRisk> out;
  for (int l = 0; l < net.num_lines(); ++l) {
    out.push_back(make_line_risk(net.lines[l].id, pi[l], net.horizon,
                                 metric.empty() ? 0.0 : metric[l]));
  }
  return out;
}

RiskBudget log_wip(double pi_tol) {
  RiskBudget b;
  b.mode = BudgetMode::kLogWip;
  b.pi_tol = pi_tol;
  return b;
}

// Checks first-stage legality and per-scenario physics of a solved plan.
void check_solution(const PowerNetwork& net, const DayAheadResult& r,
                    const ScenarioSet& scenarios, double theta_bound) {
  const CommitmentPlan& p = r.plan;
  CommitmentPlan derived = p;
  derive_transitions(derived, net);
  CHECK(derived.gen_up == p.gen_up);
  CHECK(derived.gen_down == p.gen_down);
  CHECK(derived.line_down == p.line_down);
  for (int l = 0; l < net.num_lines(); ++l) {
    for (int t = 1; t < net.horizon; ++t) CHECK(p.line_on(l, t) <= p.line_on(l, t - 1));
  }
  for (int g = 0; g < net.num_generators(); ++g) {
    const Generator& gen = net.generators[g];
    for (int t = 0; t < net.horizon; ++t) {
      int ups = 0, downs = 0;
      for (int s = std::max(0, t - gen.min_up); s <= t; ++s) ups += p.gen_up(g, s);
      for (int s = std::max(0, t - gen.min_down); s <= t; ++s) downs += p.gen_down(g, s);
      CHECK(ups <= p.gen_on(g, t));
      CHECK(downs <= 1 - p.gen_on(g, t));
    }
  }
  for (int w = 0; w < scenarios.size(); ++w) {
    const ScenarioDispatch& d = r.dispatch.scenarios[w];
    const Scenario& sc = scenarios.scenarios[w];
    for (int t = 0; t < net.horizon; ++t) {
      std::vector<double> balance(net.num_buses(), 0.0);
      for (int g = 0; g < net.num_generators(); ++g) {
        const Generator& gen = net.generators[g];
        const double pg = d.p_gen(g, t);
        CHECK(pg >= gen.p_min * p.gen_on(g, t) - 1e-6);
        CHECK(pg <= gen.p_max * p.gen_on(g, t) + 1e-6);
        CHECK(d.p_aux(g, t) == doctest::Approx(pg - gen.p_max * p.gen_on(g, t)).epsilon(1e-6));
        if (t > 0) {
          const double change = d.p_aux(g, t) - d.p_aux(g, t - 1);
          CHECK(change <= gen.ramp_up + 1e-6);
          CHECK(change >= gen.ramp_down - 1e-6);
        }
        balance[net.bus_index(gen.bus)] += pg;
      }
      for (int l = 0; l < net.num_lines(); ++l) {
        const Line& line = net.lines[l];
        const double f = d.flow(l, t);
        const double dtheta = d.theta(net.bus_index(line.from_bus), t) -
                              d.theta(net.bus_index(line.to_bus), t);
        if (p.line_on(l, t)) {
          CHECK(f == doctest::Approx(line.susceptance * dtheta).epsilon(1e-6));
        } else {
          CHECK(std::abs(f) < 1e-6);
          CHECK(std::abs(dtheta) <= theta_bound + 1e-6);
        }
        CHECK(f <= line.flow_max + 1e-6);
        CHECK(f >= line.flow_min - 1e-6);
        balance[net.bus_index(line.from_bus)] -= f;
        balance[net.bus_index(line.to_bus)] += f;
      }
      for (int k = 0; k < net.num_demands(); ++k) {
        balance[net.bus_index(net.demands[k].bus)] -= d.served(k, t) * sc.demand(k, t);
      }
      for (int b = 0; b < net.num_buses(); ++b) {
        if (!d.spill.empty()) balance[b] -= d.spill(b, t);
        CHECK(std::abs(balance[b]) < 1e-5);
      }
    }
  }
}

}  // namespace

TEST_CASE("budget modes parse and validate") {
  CHECK(parse_budget_mode("log-wip") == BudgetMode::kLogWip);
  CHECK(parse_budget_mode("n-minus-k") == BudgetMode::kNMinusK);
  CHECK(std::string(to_string(BudgetMode::kWfpiSlack)) == "wfpi-slack");
  CHECK_THROWS_AS(parse_budget_mode("bogus"), ConfigError);
  CHECK(parse_log_wip_form("shutdown-step") == LogWipForm::kShutdownStep);
  CHECK_THROWS_AS(validate_budget(log_wip(0.0), 2), ConfigError);
  CHECK_THROWS_AS(validate_budget(log_wip(1.5), 2), ConfigError);
  CHECK_NOTHROW(validate_budget(log_wip(1.0), 2));
  RiskBudget nk;
  nk.mode = BudgetMode::kNMinusK;
  nk.k = 3;
  CHECK_THROWS_AS(validate_budget(nk, 2), ConfigError);
  RiskBudget slack;
  slack.mode = BudgetMode::kWfpiSlack;
  slack.r_slack_max = -1.0;
  CHECK_THROWS_AS(validate_budget(slack, 2), ConfigError);
}

TEST_CASE("single unit serves the load at marginal cost plus startup") {
  const PowerNetwork net = single_bus(1, 50.0, 100.0);
  const ScenarioSet sc = base_scenario(net, {});
  const DayAheadResult r = solve_day_ahead(net, sc, {}, {}, {}, exact());
  CHECK(r.plan.gen_on(0, 0) == 1);
  CHECK(r.dispatch.scenarios[0].p_gen(0, 0) == doctest::Approx(50.0));
  CHECK(r.dispatch.scenarios[0].served(0, 0) == doctest::Approx(1.0));
  CHECK(r.objective == doctest::Approx(600.0));
  CHECK(r.costs.uc == doctest::Approx(100.0));
  CHECK(r.costs.oc == doctest::Approx(500.0));
  CHECK(r.costs.voll == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.costs.total == doctest::Approx(600.0));
}

TEST_CASE("all units forced off sheds the whole load") {
  const PowerNetwork net = single_bus(1, 50.0, 100.0);
  const ScenarioSet sc = base_scenario(net, {});
  const CommitmentPlan off = uniform_plan(net, false);
  BuildOptions opt;
  opt.fixed_plan = &off;
  const DayAheadResult r = solve_day_ahead(net, sc, {}, {}, opt, exact());
  CHECK(r.dispatch.scenarios[0].served(0, 0) == doctest::Approx(0.0));
  CHECK(r.costs.voll == doctest::Approx(50000.0));
  CHECK(r.objective == doctest::Approx(50000.0));
}

TEST_CASE("evaluate_costs on hand-built dispatches") {
  SUBCASE("100 MWh shed at 1000 $/MWh") {
    const PowerNetwork net = single_bus(2, 50.0, 0.0);
    const ScenarioSet sc = base_scenario(net, {});
    const CommitmentPlan plan = uniform_plan(net, false);
    DispatchSolution d;
    ScenarioDispatch sd;
    sd.p_gen = Matrix<double>(1, 2, 0.0);
    sd.served = Matrix<double>(1, 2, 0.0);
    d.scenarios.push_back(sd);
    const CostBreakdown c = evaluate_costs(net, plan, d, sc);
    CHECK(c.voll == doctest::Approx(100000.0));
    CHECK(c.total == doctest::Approx(c.uc + c.oc + c.voll + c.slack_penalty));
  }
  SUBCASE("one startup and a flat day") {
    PowerNetwork net = single_bus(24, 10.0, 500.0);
    net.generators[0].marginal_cost = 7.0;
    const ScenarioSet sc = base_scenario(net, {});
    const CommitmentPlan plan = uniform_plan(net, true);
    DispatchSolution d;
    ScenarioDispatch sd;
    sd.p_gen = Matrix<double>(1, 24, 10.0);
    sd.served = Matrix<double>(1, 24, 1.0);
    d.scenarios.push_back(sd);
    const CostBreakdown c = evaluate_costs(net, plan, d, sc);
    CHECK(c.uc == doctest::Approx(500.0));
    CHECK(c.oc == doctest::Approx(1680.0));
    CHECK(c.total == doctest::Approx(2180.0));
    CHECK(c.mean == doctest::Approx(2180.0));
  }
  SUBCASE("shape mismatch") {
    const PowerNetwork net = single_bus(2, 50.0, 0.0);
    const ScenarioSet sc = base_scenario(net, {});
    CHECK_THROWS_AS(evaluate_costs(net, uniform_plan(net, true), DispatchSolution{}, sc),
                    DimensionMismatch);
  }
}

TEST_CASE("model size follows the variable-count formula") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  const ScenarioSet sc = two_scenarios(net, {0.1, 0.1}, 1.2);
  const int H = net.horizon, G = net.num_generators(), L = net.num_lines(),
            N = net.num_buses(), D = net.num_demands(), W = sc.size();
  const DayAheadModel m = build_day_ahead(net, sc, {}, {});
  const int first_stage = 3 * G * H + 2 * L * H;
  CHECK(m.model.num_binaries() == first_stage);
  CHECK(m.model.num_variables() == first_stage + W * H * (2 * G + N + L + D));
  BuildOptions cv;
  cv.cvar = CvarConfig{0.5, 0.9};
  cv.spill = true;
  const DayAheadModel m2 = build_day_ahead(net, sc, {}, {}, cv);
  CHECK(m2.model.num_variables() == first_stage + W * H * (2 * G + 2 * N + L + D) + 1 + W);
}

TEST_CASE("oversized models are rejected before building") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  ScenarioSet big = base_scenario(net, {0.0, 0.0});
  const Scenario one = big.scenarios[0];
  big.scenarios.assign(10000, one);
  for (auto& s : big.scenarios) s.probability = 1e-4;
  CHECK_THROWS_AS(build_day_ahead(net, big, {}, {}), ModelTooLarge);
}

TEST_CASE("log-wip budget matches the product of line probabilities") {
  const PowerNetwork net = parallel_lines();
  const std::vector<double> pi{0.1, 0.2};
  const ScenarioSet sc = base_scenario(net, pi);
  const auto lines = risks(net, pi);
  for (double tol : {0.01, 0.03, 0.1, 0.5, 0.75, 1.0}) {
    for (int mask = 0; mask < 4; ++mask) {
      DayAheadModel dm = build_day_ahead(net, sc, log_wip(tol), lines);
      double product = 1.0;
      for (int l = 0; l < 2; ++l) {
        const bool on = (mask >> l) & 1;
        dm.model.fix(milp::VarId{dm.index.line_on(l, 0)}, on ? 1.0 : 0.0);
        product *= on ? 1.0 - pi[l] : pi[l];
      }
      const milp::MilpSolution s = milp::solve_milp(dm.model, exact());
      CAPTURE(tol);
      CAPTURE(mask);
      // Exact comparison only makes sense away from the boundary.
      if (std::abs(product - tol) > 1e-9) CHECK(s.has_solution() == (product <= tol));
    }
  }
}

TEST_CASE("log-wip feasibility is one-sided") {
  // A single line with pi = 0.1: energized gives 0.9, dark gives 0.1, so a
  // tolerance of 0.05 admits neither and the solve names the budget.
  PowerNetwork net = parallel_lines();
  net.lines.pop_back();
  const ScenarioSet sc = base_scenario(net, {0.1});
  const auto lines = risks(net, {0.1});
  try {
    solve_day_ahead(net, sc, log_wip(0.05), lines, {}, exact());
    FAIL("expected SolveFailed");
  } catch (const SolveFailed& e) {
    CHECK(std::string(e.what()).find("risk budget") != std::string::npos);
  }
  const DayAheadResult dark = solve_day_ahead(net, sc, log_wip(0.2), lines, {}, exact());
  CHECK(dark.plan.line_on(0, 0) == 0);
  CHECK(dark.costs.voll == doctest::Approx(50000.0));
  const DayAheadResult lit = solve_day_ahead(net, sc, log_wip(1.0), lines, {}, exact());
  CHECK(lit.plan.line_on(0, 0) == 1);
  CHECK(lit.costs.voll == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("zero-risk lines never enter the log-wip rows") {
  const PowerNetwork net = parallel_lines();
  const ScenarioSet sc = base_scenario(net, {0.0, 0.3});
  const auto lines = risks(net, {0.0, 0.3});
  const DayAheadModel dm = build_day_ahead(net, sc, log_wip(0.5), lines);
  REQUIRE(dm.index.budget_rows.size() == 1);
  const int zero_line = dm.index.line_on(0, 0);
  for (const auto& term : dm.model.constraint(dm.index.budget_rows[0]).terms) {
    CHECK(term.var.index != zero_line);
  }
  // Line 2 must go dark (0.7 > 0.5); line 1 still carries the load.
  const DayAheadResult r = solve_day_ahead(net, sc, log_wip(0.5), lines, {}, exact());
  CHECK(r.plan.line_on(1, 0) == 0);
  CHECK(r.costs.voll == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("n-minus-k with k equal to the line count opens every line") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  const ScenarioSet sc = base_scenario(net, {0.1, 0.1});
  RiskBudget b;
  b.mode = BudgetMode::kNMinusK;
  b.k = net.num_lines();
  const DayAheadResult r = solve_day_ahead(net, sc, b, risks(net, {0.1, 0.1}), {}, exact());
  for (int l = 0; l < net.num_lines(); ++l) {
    for (int t = 0; t < net.horizon; ++t) CHECK(r.plan.line_on(l, t) == 0);
  }
  // Bus 2 has no generator, so everything is shed.
  CHECK(r.costs.voll == doctest::Approx(1000.0 * 150.0));
}

TEST_CASE("wfpi-sum and wfpi-slack budgets") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  const ScenarioSet sc = base_scenario(net, {0.1, 0.1});
  const auto lines = risks(net, {0.1, 0.1}, {200.0, 50.0});
  RiskBudget sum;
  sum.mode = BudgetMode::kWfpiSum;
  sum.r_tol = 100.0;
  const DayAheadResult r = solve_day_ahead(net, sc, sum, lines, {}, exact());
  for (int t = 0; t < net.horizon; ++t) {
    CHECK(r.plan.line_on(0, t) == 0);
    CHECK(r.plan.line_on(1, t) == 1);
  }
  CHECK(budget_slack_cost(r.plan, sum, lines) == 0.0);

  RiskBudget slack;
  slack.mode = BudgetMode::kWfpiSlack;
  slack.r_tol = 50.0;
  slack.r_slack_max = 200.0;
  slack.slack_penalty = 1.0;
  const DayAheadResult s = solve_day_ahead(net, sc, slack, lines, {}, exact());
  // Dropping line 2 leaves 150 of slack per step against 200 with both lines
  // and an unreachable load with neither; line 1 alone still carries the
  // cheap unit's output.
  for (int t = 0; t < net.horizon; ++t) {
    CHECK(s.plan.line_on(0, t) == 1);
    CHECK(s.plan.line_on(1, t) == 0);
  }
  CHECK(s.costs.slack_penalty == doctest::Approx(3 * 150.0));
  CHECK(budget_slack_cost(s.plan, slack, lines) == doctest::Approx(s.costs.slack_penalty));
  CHECK(s.objective == doctest::Approx(s.costs.total));
}

TEST_CASE("optimal cost is non-increasing in pi_tol") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  const std::vector<double> pi{0.3, 0.1};
  const ScenarioSet sc = base_scenario(net, pi);
  const auto lines = risks(net, pi);
  double previous = INFINITY;
  for (double tol : {0.05, 0.1, 0.3, 0.65, 1.0}) {
    const DayAheadResult r = solve_day_ahead(net, sc, log_wip(tol), lines, {}, exact());
    CAPTURE(tol);
    CHECK(r.objective <= previous + 1e-6);
    previous = r.objective;
    check_solution(net, r, sc, 0.6);
  }
}

TEST_CASE("seeding the day-ahead solve with a plan keeps the optimum") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  const std::vector<double> pi{0.3, 0.1};
  const ScenarioSet sc = base_scenario(net, pi);
  const auto lines = risks(net, pi);
  const DayAheadResult tight = solve_day_ahead(net, sc, log_wip(0.1), lines, {}, exact());
  const DayAheadResult plain = solve_day_ahead(net, sc, log_wip(0.65), lines, {}, exact());
  // A plan meeting a tighter budget also meets a looser one.
  const DayAheadResult seeded =
      solve_day_ahead(net, sc, log_wip(0.65), lines, {}, exact(), &tight.plan);
  CHECK(seeded.objective == doctest::Approx(plain.objective).epsilon(1e-9));
  check_solution(net, seeded, sc, 0.6);
  // The start's binaries land where plan_start_vector puts them.
  const DayAheadModel dm = build_day_ahead(net, sc, log_wip(0.65), lines);
  const std::vector<double> x = plan_start_vector(dm, tight.plan);
  for (int l = 0; l < net.num_lines(); ++l) {
    for (int t = 0; t < net.horizon; ++t) {
      CHECK(x[dm.index.line_on(l, t)] == tight.plan.line_on(l, t));
    }
  }
}

TEST_CASE("stochastic solutions satisfy every constraint family") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  const std::vector<double> pi{0.3, 0.1};
  const ScenarioSet sc = two_scenarios(net, pi, 1.5);
  const auto lines = risks(net, pi);
  for (LogWipForm form : {LogWipForm::kCumulative, LogWipForm::kShutdownStep}) {
    // The shutdown-step form needs the lit lines alone to meet the
    // tolerance once nothing is switching, hence the looser value.
    RiskBudget b = log_wip(form == LogWipForm::kCumulative ? 0.3 : 0.65);
    b.log_form = form;
    BuildOptions opt;
    opt.spill = form == LogWipForm::kShutdownStep;
    const DayAheadResult r = solve_day_ahead(net, sc, b, lines, opt, exact());
    check_solution(net, r, sc, opt.theta_bound);
    CHECK(r.objective == doctest::Approx(r.costs.total).epsilon(1e-7));
  }
}

TEST_CASE("cvar weight zero matches the risk-neutral solve") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  const ScenarioSet sc = two_scenarios(net, {0.3, 0.1}, 1.6);
  const auto lines = risks(net, {0.3, 0.1});
  const DayAheadResult neutral = solve_day_ahead(net, sc, log_wip(0.3), lines, {}, exact());
  BuildOptions opt;
  opt.cvar = CvarConfig{0.0, 0.9};
  const DayAheadResult zero = solve_day_ahead(net, sc, log_wip(0.3), lines, opt, exact());
  CHECK(zero.objective == doctest::Approx(neutral.objective));
  CHECK(zero.costs.mean == doctest::Approx(neutral.costs.mean));
}

TEST_CASE("raising beta trades mean for tail cost") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  ScenarioSet sc = two_scenarios(net, {0.3, 0.1}, 1.9);
  const auto lines = risks(net, {0.3, 0.1});
  double last_mean = -INFINITY, last_cvar = INFINITY;
  for (double beta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    BuildOptions opt;
    opt.cvar = CvarConfig{beta, 0.5};
    const DayAheadResult r = solve_day_ahead(net, sc, log_wip(0.3), lines, opt, exact());
    CAPTURE(beta);
    CHECK(r.objective == doctest::Approx(r.costs.mean_cvar_objective).epsilon(1e-7));
    CHECK(r.costs.cvar == doctest::Approx(cvar(r.costs.per_scenario, r.costs.probabilities, 0.5)));
    CHECK(r.costs.mean >= last_mean - 1e-6);
    CHECK(r.costs.cvar <= last_cvar + 1e-6);
    last_mean = r.costs.mean;
    last_cvar = r.costs.cvar;
  }
}

TEST_CASE("fixed plans and step windows") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  const ScenarioSet sc = base_scenario(net, {0.0, 0.0});
  const DayAheadResult full = solve_day_ahead(net, sc, {}, {}, {}, exact());
  BuildOptions fixed;
  fixed.fixed_plan = &full.plan;
  const DayAheadResult again = solve_day_ahead(net, sc, {}, {}, fixed, exact());
  CHECK(again.objective == doctest::Approx(full.objective));

  BuildOptions window = fixed;
  window.first_step = 1;
  window.last_step = 2;
  CHECK_THROWS_AS(build_day_ahead(net, sc, {}, {}, window), ConfigError);
  window.initial_aux.assign(net.num_generators(), 0.0);
  for (int g = 0; g < net.num_generators(); ++g) {
    window.initial_aux[g] = full.dispatch.scenarios[0].p_aux(g, 0);
  }
  const DayAheadModel dm = build_day_ahead(net, sc, {}, {}, window);
  CHECK(dm.index.scenarios[0].p_gen(0, 0) == -1);
  CHECK(dm.index.scenarios[0].p_gen(0, 1) >= 0);
  BuildOptions unfixed_window;
  unfixed_window.last_step = 2;
  CHECK_THROWS_AS(build_day_ahead(net, sc, {}, {}, unfixed_window), ConfigError);
}

TEST_CASE("plan export round trips") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  const ScenarioSet sc = base_scenario(net, {0.3, 0.1});
  const DayAheadResult r =
      solve_day_ahead(net, sc, log_wip(0.3), risks(net, {0.3, 0.1}), {}, exact());
  const CommitmentPlan back = parse_plan(plan_to_json(r.plan, net), net);
  CHECK(back.gen_on == r.plan.gen_on);
  CHECK(back.line_on == r.plan.line_on);
  CHECK(back.gen_up == r.plan.gen_up);
  CHECK(back.line_down == r.plan.line_down);
  CHECK(commitments_csv(r.plan, net).rfind("generator,step,", 0) == 0);
  CHECK(energizations_csv(r.plan, net).rfind("line,step,", 0) == 0);
  CHECK(dispatch_csv(r.dispatch, net).find('\n') != std::string::npos);
  CHECK(costs_to_json(r.costs).find("\"mean_cvar_objective\"") != std::string::npos);
  CHECK_THROWS_AS(parse_plan("{\"horizon\": 3}", net), ParseError);
}
