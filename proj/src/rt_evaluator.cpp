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

#include "psps/rt_evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "psps/csv.hpp"
#include "psps/error.hpp"
#include "psps/milp/lp_solver.hpp"
#include "psps/milp/solver.hpp"
#include "psps/seeding.hpp"

namespace psps {
namespace {

void check_scenario(const PowerNetwork& net, const CommitmentPlan& plan,
                    const OutageScenario& s) {
  const int H = net.horizon;
  if (plan.gen_on.rows() != net.num_generators() || plan.gen_on.cols() != H ||
      plan.line_on.rows() != net.num_lines() || plan.line_on.cols() != H) {
    throw DimensionMismatch("real-time: plan does not match the network");
  }
  if (s.available.rows() != net.num_lines() || s.available.cols() != H) {
    throw DimensionMismatch("real-time: scenario " + std::to_string(s.id) +
                            " availability must be lines x horizon");
  }
  if (s.demand.rows() != net.num_demands() || s.demand.cols() != H) {
    throw DimensionMismatch("real-time: scenario " + std::to_string(s.id) +
                            " demand must be demands x horizon");
  }
  for (int l = 0; l < net.num_lines(); ++l) {
    for (int t = 0; t < H; ++t) {
      if (s.available(l, t) > plan.line_on(l, t)) {
        throw ValidationError("real-time: line " + std::to_string(net.lines[l].id) +
                              " available while de-energized by the plan");
      }
    }
  }
}

// Plan with the scenario's availability as line energization.
CommitmentPlan realized_plan(const PowerNetwork& net, const CommitmentPlan& plan,
                             const Matrix<std::int8_t>& available) {
  CommitmentPlan p = plan;
  p.line_on = available;
  derive_transitions(p, net);
  return p;
}

double plan_uc(const PowerNetwork& net, const CommitmentPlan& plan) {
  double uc = 0.0;
  for (int g = 0; g < net.num_generators(); ++g) {
    for (int t = 0; t < net.horizon; ++t) {
      uc += net.generators[g].startup_cost * plan.gen_up(g, t) +
            net.generators[g].shutdown_cost * plan.gen_down(g, t);
    }
  }
  return uc;
}

void fill_costs(const PowerNetwork& net, const CommitmentPlan& plan, const Matrix<double>& demand,
                double spill_penalty, RecourseResult& r) {
  const double dt = net.step_hours;
  const ScenarioDispatch& d = r.dispatch;
  r.uc = plan_uc(net, plan);
  for (int g = 0; g < net.num_generators(); ++g) {
    for (int t = 0; t < net.horizon; ++t) r.oc += net.generators[g].marginal_cost * d.p_gen(g, t) * dt;
  }
  for (int k = 0; k < net.num_demands(); ++k) {
    for (int t = 0; t < net.horizon; ++t) {
      r.voll += net.demands[k].voll * (1.0 - d.served(k, t)) * demand(k, t) * dt;
      r.served_mwh += d.served(k, t) * demand(k, t) * dt;
    }
  }
  if (!d.spill.empty()) {
    for (double v : d.spill.data()) r.spill += spill_penalty * v * dt;
  }
  r.cost = r.uc + r.oc + r.voll + r.spill;
}

BuildOptions fixed_options(const RecourseOptions& o, const CommitmentPlan* plan) {
  BuildOptions b;
  b.theta_bound = o.theta_bound;
  b.fixed_plan = plan;
  b.spill = o.spill;
  b.spill_penalty = o.spill_penalty;
  return b;
}

// Keeps one LP for a plan and re-solves it for each scenario by moving the
// bounds of the line availability and served-load columns.
class RecourseEngine {
 public:
  RecourseEngine(const PowerNetwork& net, const CommitmentPlan& plan, const Matrix<double>& demand,
                 const RecourseOptions& options)
      : net_(net), plan_(plan), options_(options) {
    const ScenarioSet sc = single_scenario(demand, std::vector<double>(net.num_lines(), 0.0));
    dm_ = build_day_ahead(net, sc, {}, {}, fixed_options(options, &plan_));
    lp_ = std::make_unique<milp::LpSolver>(dm_.model);
  }

  RecourseResult solve(const OutageScenario& s) {
    const ModelIndex& ix = dm_.index;
    for (int l = 0; l < net_.num_lines(); ++l) {
      for (int t = 0; t < net_.horizon; ++t) {
        lp_->set_bounds(ix.line_on(l, t), s.available(l, t), s.available(l, t));
      }
    }
    const ScenarioVars& sv = ix.scenarios[0];
    for (int d = 0; d < net_.num_demands(); ++d) {
      for (int t = 0; t < net_.horizon; ++t) lp_->set_bounds(sv.served(d, t), 0.0, s.demand(d, t));
    }
    const milp::LpStatus status = lp_->solve();
    if (status != milp::LpStatus::kOptimal) {
      throw SolveFailed("recourse LP for scenario " + std::to_string(s.id) + " is " +
                            (status == milp::LpStatus::kInfeasible ? "infeasible" : "unbounded"),
                        status == milp::LpStatus::kInfeasible ? "Infeasible" : "Unbounded");
    }
    const ScenarioSet sc = single_scenario(s.demand, std::vector<double>(net_.num_lines(), 0.0));
    RecourseResult r;
    r.dispatch = extract_dispatch(dm_, lp_->solution(), net_, sc).scenarios[0];
    fill_costs(net_, plan_, s.demand, options_.spill_penalty, r);
    return r;
  }

 private:
  const PowerNetwork& net_;
  CommitmentPlan plan_;
  RecourseOptions options_;
  DayAheadModel dm_;
  std::unique_ptr<milp::LpSolver> lp_;
};

std::string pattern_key(const OutageScenario& s) {
  std::string key(reinterpret_cast<const char*>(s.available.data().data()),
                  s.available.data().size());
  key.append(reinterpret_cast<const char*>(s.demand.data().data()),
             s.demand.data().size() * sizeof(double));
  return key;
}

template <typename T>
Matrix<T> hold_last(const Matrix<T>& m, int cols) {
  Matrix<T> out(m.rows(), cols);
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < cols; ++c) out(r, c) = m(r, std::min(c, m.cols() - 1));
  }
  return out;
}

}  // namespace

OnsetMode parse_onset_mode(std::string_view s) {
  if (s == "uniform") return OnsetMode::kUniform;
  if (s == "whole-day") return OnsetMode::kWholeDay;
  throw ConfigError("unknown onset mode '" + std::string(s) + "' (uniform, whole-day)");
}

const char* to_string(OnsetMode m) { return m == OnsetMode::kUniform ? "uniform" : "whole-day"; }

std::vector<OutageScenario> sample_outages(const std::vector<LineRisk>& lines,
                                           const CommitmentPlan& plan, int n,
                                           std::uint64_t seed, const Matrix<double>& demand,
                                           OnsetMode onset) {
  if (n < 1) throw ValidationError("sample_outages: need at least one sample");
  const int L = plan.line_on.rows();
  const int H = plan.line_on.cols();
  if (static_cast<int>(lines.size()) != L) {
    throw DimensionMismatch("sample_outages: one line risk per line required");
  }
  std::vector<OutageScenario> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(stream_seed(seed, kStageOutages, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> step(0, H - 1);
    OutageScenario s;
    s.id = i + 1;
    s.probability = 1.0 / n;
    s.available = plan.line_on;
    s.demand = demand;
    for (int l = 0; l < L; ++l) {
      // Both draws are always taken so each line's stream position is fixed.
      const bool ignites = u(rng) < (lines[l].pi.empty() ? 0.0 : lines[l].pi[0]);
      const int t_fail = step(rng);
      if (!ignites) continue;
      const int from = onset == OnsetMode::kWholeDay ? 0 : t_fail;
      for (int t = from; t < H; ++t) s.available(l, t) = 0;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<OutageScenario> with_demand_set(const std::vector<OutageScenario>& outages,
                                            const std::vector<Matrix<double>>& demands,
                                            const std::vector<double>& weights) {
  if (demands.empty() || demands.size() != weights.size()) {
    throw ValidationError("demand set: one weight per realization required");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-6) throw ValidationError("demand set: weights must sum to 1");
  std::vector<OutageScenario> out;
  int id = 1;
  for (const OutageScenario& o : outages) {
    for (std::size_t k = 0; k < demands.size(); ++k) {
      OutageScenario s = o;
      s.id = id++;
      s.probability = o.probability * weights[k];
      s.demand = demands[k];
      out.push_back(std::move(s));
    }
  }
  return out;
}

RecourseResult solve_recourse(const PowerNetwork& net, const CommitmentPlan& plan,
                              const OutageScenario& scenario, const RecourseOptions& options) {
  check_scenario(net, plan, scenario);
  const CommitmentPlan p = realized_plan(net, plan, scenario.available);
  const ScenarioSet sc =
      single_scenario(scenario.demand, std::vector<double>(net.num_lines(), 0.0));
  const DayAheadModel dm = build_day_ahead(net, sc, {}, {}, fixed_options(options, &p));
  const milp::MilpSolution sol = milp::solve_lp(dm.model);
  if (!sol.has_solution()) {
    throw SolveFailed("recourse LP for scenario " + std::to_string(scenario.id) + " is " +
                          milp::to_string(sol.status),
                      milp::to_string(sol.status));
  }
  RecourseResult r;
  r.dispatch = extract_dispatch(dm, sol.values, net, sc).scenarios[0];
  fill_costs(net, plan, scenario.demand, options.spill_penalty, r);
  return r;
}

RecourseResult receding_horizon_run(const PowerNetwork& net, const CommitmentPlan& plan,
                                    const OutageScenario& scenario,
                                    const RecedingOptions& options) {
  check_scenario(net, plan, scenario);
  const int H = net.horizon;
  const int G = net.num_generators();
  if (options.window < 1 || options.window > H) {
    throw ConfigError("receding horizon window must be in 1.." + std::to_string(H));
  }
  const int H_ext = options.pad ? H + options.window - 1 : H;
  PowerNetwork ext = net;
  ext.horizon = H_ext;
  CommitmentPlan p;
  p.gen_on = hold_last(plan.gen_on, H_ext);
  p.line_on = hold_last(scenario.available, H_ext);
  derive_transitions(p, ext);
  const Matrix<double> demand = hold_last(scenario.demand, H_ext);
  const ScenarioSet sc = single_scenario(demand, std::vector<double>(net.num_lines(), 0.0));

  RecourseResult r;
  ScenarioDispatch& d = r.dispatch;
  d.p_gen = Matrix<double>(G, H);
  d.p_aux = Matrix<double>(G, H);
  d.flow = Matrix<double>(net.num_lines(), H);
  d.theta = Matrix<double>(net.num_buses(), H);
  d.served = Matrix<double>(net.num_demands(), H, 1.0);
  if (options.recourse.spill) d.spill = Matrix<double>(net.num_buses(), H);
  std::vector<double> aux(G, 0.0);
  for (int t = 0; t < H; ++t) {
    BuildOptions b = fixed_options(options.recourse, &p);
    b.first_step = t;
    b.last_step = std::min(t + options.window, H_ext);
    if (t > 0) b.initial_aux = aux;
    b.include_uc = false;
    const DayAheadModel dm = build_day_ahead(ext, sc, {}, {}, b);
    const milp::MilpSolution sol = milp::solve_lp(dm.model);
    if (!sol.has_solution()) {
      throw SolveFailed("receding window at step " + std::to_string(t + 1) + " is " +
                            milp::to_string(sol.status),
                        milp::to_string(sol.status));
    }
    const ScenarioDispatch w = extract_dispatch(dm, sol.values, ext, sc).scenarios[0];
    for (int g = 0; g < G; ++g) {
      d.p_gen(g, t) = w.p_gen(g, t);
      d.p_aux(g, t) = w.p_aux(g, t);
      aux[g] = w.p_aux(g, t);
    }
    for (int l = 0; l < net.num_lines(); ++l) d.flow(l, t) = w.flow(l, t);
    for (int b2 = 0; b2 < net.num_buses(); ++b2) {
      d.theta(b2, t) = w.theta(b2, t);
      if (options.recourse.spill) d.spill(b2, t) = w.spill(b2, t);
    }
    for (int k = 0; k < net.num_demands(); ++k) d.served(k, t) = w.served(k, t);
  }
  fill_costs(net, plan, scenario.demand, options.recourse.spill_penalty, r);
  return r;
}

double average_available_generation(const PowerNetwork& net, const CommitmentPlan& plan) {
  if (net.horizon == 0) return 0.0;
  double sum = 0.0;
  for (int g = 0; g < net.num_generators(); ++g) {
    for (int t = 0; t < net.horizon; ++t) sum += net.generators[g].p_max * plan.gen_on(g, t);
  }
  return net.step_hours * sum / net.horizon;
}

double realized_risk(const std::vector<LineRisk>& lines, const Matrix<std::int8_t>& available) {
  if (static_cast<int>(lines.size()) != available.rows()) {
    throw DimensionMismatch("realized_risk: one line risk per line required");
  }
  const int last = available.cols() - 1;
  if (last < 0) return 0.0;
  double risk = 0.0;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const LineRisk& r = lines[l];
    if (r.zero_risk()) continue;
    const int t = std::min<int>(last, static_cast<int>(r.pi.size()) - 1);
    risk += available(static_cast<int>(l), last) ? r.log_one_minus_pi[t] : r.log_pi[t];
  }
  return risk;
}

double weighted_quantile(const std::vector<double>& values, const std::vector<double>& probs,
                         double q) {
  if (values.empty()) return 0.0;
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double cum = 0.0;
  for (std::size_t i : order) {
    cum += probs[i];
    if (cum >= q - 1e-12) return values[i];
  }
  return values[order.back()];
}

RtReport evaluate_scenarios(const PowerNetwork& net, const CommitmentPlan& plan,
                            const std::vector<LineRisk>& rt_lines,
                            const std::vector<OutageScenario>& scenarios,
                            const RtOptions& options) {
  if (scenarios.empty()) throw ValidationError("real-time: no scenarios to evaluate");
  if (static_cast<int>(rt_lines.size()) != net.num_lines()) {
    throw DimensionMismatch("real-time: one line risk per line required");
  }
  for (const OutageScenario& s : scenarios) check_scenario(net, plan, s);
  const int n = static_cast<int>(scenarios.size());
  std::vector<RecourseResult> results(n);

  int threads = options.threads > 0 ? options.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, n);
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](int worker) {
    try {
      std::unique_ptr<RecourseEngine> engine;
      std::unordered_map<std::string, int> seen;
      for (int i = worker; i < n; i += threads) {
        const OutageScenario& s = scenarios[i];
        const std::string key = pattern_key(s);
        if (auto it = seen.find(key); it != seen.end()) {
          results[i] = results[it->second];
          continue;
        }
        if (options.receding) {
          results[i] = receding_horizon_run(net, plan, s, *options.receding);
        } else {
          if (!engine) engine = std::make_unique<RecourseEngine>(net, plan, s.demand, options.recourse);
          results[i] = engine->solve(s);
        }
        seen.emplace(key, i);
      }
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (std::thread& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RtReport rep;
  rep.samples = n;
  rep.onset = options.onset;
  rep.receding = options.receding.has_value();
  rep.uc = results[0].uc;
  std::unordered_set<std::string> patterns;
  for (int i = 0; i < n; ++i) {
    const OutageScenario& s = scenarios[i];
    const RecourseResult& r = results[i];
    patterns.insert(pattern_key(s));
    rep.costs.push_back(r.cost);
    rep.probabilities.push_back(s.probability);
    rep.risks.push_back(realized_risk(rt_lines, s.available));
    rep.served_mwh.push_back(r.served_mwh);
    rep.expected_cost += s.probability * r.cost;
    rep.expected_oc += s.probability * r.oc;
    rep.expected_voll += s.probability * r.voll;
    rep.expected_spill += s.probability * r.spill;
    rep.expected_risk += s.probability * rep.risks.back();
    rep.expected_served_mwh += s.probability * r.served_mwh;
  }
  rep.distinct_patterns = static_cast<int>(patterns.size());
  rep.cost_p05 = weighted_quantile(rep.costs, rep.probabilities, 0.05);
  rep.cost_p50 = weighted_quantile(rep.costs, rep.probabilities, 0.50);
  rep.cost_p95 = weighted_quantile(rep.costs, rep.probabilities, 0.95);
  rep.plan_risk = realized_risk(rt_lines, plan.line_on);
  rep.aag_mw = average_available_generation(net, plan);
  return rep;
}

RtReport evaluate_real_time(const PowerNetwork& net, const CommitmentPlan& plan,
                            const std::vector<LineRisk>& rt_lines, const Matrix<double>& demand,
                            const RtOptions& options) {
  const std::vector<OutageScenario> scenarios =
      sample_outages(rt_lines, plan, options.samples, options.seed, demand, options.onset);
  return evaluate_scenarios(net, plan, rt_lines, scenarios, options);
}

std::string rt_report_to_json(const RtReport& r) {
  nlohmann::json j;
  j["samples"] = r.samples;
  j["onset"] = to_string(r.onset);
  j["receding_horizon"] = r.receding;
  j["distinct_outage_patterns"] = r.distinct_patterns;
  j["expected_cost"] = r.expected_cost;
  j["cost_quantiles"] = {{"p05", r.cost_p05}, {"p50", r.cost_p50}, {"p95", r.cost_p95}};
  j["uc"] = r.uc;
  j["expected_oc"] = r.expected_oc;
  j["expected_voll"] = r.expected_voll;
  j["expected_spill"] = r.expected_spill;
  j["expected_realized_risk"] = r.expected_risk;
  j["plan_risk"] = r.plan_risk;
  j["expected_served_mwh"] = r.expected_served_mwh;
  j["aag_mw"] = r.aag_mw;
  return j.dump(2) + "\n";
}

std::string rt_scenarios_csv(const RtReport& r) {
  std::ostringstream os;
  os << "scenario,probability,cost,realized_risk,served_mwh\n";
  for (std::size_t i = 0; i < r.costs.size(); ++i) {
    os << i + 1 << ',' << format_double(r.probabilities[i]) << ',' << format_double(r.costs[i])
       << ',' << format_double(r.risks[i]) << ',' << format_double(r.served_mwh[i]) << '\n';
  }
  return os.str();
}

}  // namespace psps
