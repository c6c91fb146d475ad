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

#include "psps/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "psps/analytics.hpp"
#include "psps/csv.hpp"
#include "psps/error.hpp"

namespace psps {

using milp::kInf;
using milp::MilpModel;
using milp::Sense;
using milp::Term;
using milp::VarId;

namespace {

VarId var(int index) { return VarId{index}; }

std::string tag(const char* family, int id, int t) {
  return std::string(family) + "_" + std::to_string(id) + "_" + std::to_string(t + 1);
}

std::string tag(const char* family, int id, int t, int w) {
  return tag(family, id, t) + "_s" + std::to_string(w);
}

int reference_bus(const PowerNetwork& net) {
  int ref = net.num_buses() > 0 ? net.buses.front().id : 1;
  bool found = false;
  for (const Generator& g : net.generators) {
    if (!found || g.bus < ref) ref = g.bus;
    found = true;
  }
  return ref;
}

void check_size(const PowerNetwork& net, int scenarios, int steps, bool fixed, bool spill) {
  const long g = net.num_generators(), l = net.num_lines(), n = net.num_buses(),
             d = net.num_demands();
  long vars = (3 * g + 2 * l + 1) * steps;
  long rows = fixed ? 0 : (3 * g + 2 * l + 1) * steps;
  vars += scenarios * (2 * g + l + n + d + (spill ? n : 0)) * static_cast<long>(steps) +
          scenarios + 1;
  rows += scenarios * (5 * g + 4 * l + n) * static_cast<long>(steps) + scenarios;
  if (vars > milp::kMaxVariables || rows > milp::kMaxConstraints) {
    throw ModelTooLarge("model needs about " + std::to_string(vars) + " variables and " +
                        std::to_string(rows) + " rows; the embedded engine allows " +
                        std::to_string(milp::kMaxVariables) + " and " +
                        std::to_string(milp::kMaxConstraints));
  }
}

}  // namespace

BudgetMode parse_budget_mode(std::string_view s) {
  if (s == "none") return BudgetMode::kNone;
  if (s == "wfpi-sum") return BudgetMode::kWfpiSum;
  if (s == "n-minus-k") return BudgetMode::kNMinusK;
  if (s == "wfpi-slack") return BudgetMode::kWfpiSlack;
  if (s == "log-wip") return BudgetMode::kLogWip;
  throw ConfigError("unknown budget mode '" + std::string(s) +
                    "' (expected none, wfpi-sum, n-minus-k, wfpi-slack or log-wip)");
}

const char* to_string(BudgetMode m) {
  switch (m) {
    case BudgetMode::kNone: return "none";
    case BudgetMode::kWfpiSum: return "wfpi-sum";
    case BudgetMode::kNMinusK: return "n-minus-k";
    case BudgetMode::kWfpiSlack: return "wfpi-slack";
    case BudgetMode::kLogWip: return "log-wip";
  }
  return "none";
}

LogWipForm parse_log_wip_form(std::string_view s) {
  if (s == "cumulative") return LogWipForm::kCumulative;
  if (s == "shutdown-step") return LogWipForm::kShutdownStep;
  throw ConfigError("unknown log_form '" + std::string(s) +
                    "' (expected cumulative or shutdown-step)");
}

const char* to_string(LogWipForm f) {
  return f == LogWipForm::kCumulative ? "cumulative" : "shutdown-step";
}

void validate_budget(const RiskBudget& b, int num_lines) {
  switch (b.mode) {
    case BudgetMode::kNone:
      return;
    case BudgetMode::kWfpiSum:
      if (!std::isfinite(b.r_tol)) throw ConfigError("budget: r_tol must be finite");
      return;
    case BudgetMode::kNMinusK:
      if (b.k < 0 || b.k > num_lines) {
        throw ConfigError("budget: k must be in 0.." + std::to_string(num_lines));
      }
      return;
    case BudgetMode::kWfpiSlack:
      if (!std::isfinite(b.r_tol)) throw ConfigError("budget: r_tol must be finite");
      if (!(b.r_slack_max >= 0.0)) throw ConfigError("budget: r_slack_max must be >= 0");
      return;
    case BudgetMode::kLogWip:
      if (!(b.pi_tol > 0.0 && b.pi_tol <= 1.0)) {
        throw ConfigError("budget: pi_tol must be in (0, 1] for log-wip");
      }
      return;
  }
}

CommitmentPlan uniform_plan(const PowerNetwork& net, bool on) {
  CommitmentPlan p;
  p.gen_on = Matrix<std::int8_t>(net.num_generators(), net.horizon, on ? 1 : 0);
  p.line_on = Matrix<std::int8_t>(net.num_lines(), net.horizon, 1);
  derive_transitions(p, net);
  return p;
}

void derive_transitions(CommitmentPlan& p, const PowerNetwork& net) {
  const int H = net.horizon;
  p.gen_up = Matrix<std::int8_t>(net.num_generators(), H);
  p.gen_down = Matrix<std::int8_t>(net.num_generators(), H);
  p.line_down = Matrix<std::int8_t>(net.num_lines(), H);
  for (int g = 0; g < net.num_generators(); ++g) {
    int prev = net.generators[g].initially_on ? 1 : 0;
    for (int t = 0; t < H; ++t) {
      const int cur = p.gen_on(g, t);
      p.gen_up(g, t) = cur > prev ? 1 : 0;
      p.gen_down(g, t) = cur < prev ? 1 : 0;
      prev = cur;
    }
  }
  for (int l = 0; l < net.num_lines(); ++l) {
    int prev = 1;
    for (int t = 0; t < H; ++t) {
      p.line_down(l, t) = prev > p.line_on(l, t) ? 1 : 0;
      prev = p.line_on(l, t);
    }
  }
}

std::vector<int> emit_risk_budget(const std::vector<LineRisk>& lines, const RiskBudget& budget,
                                  MilpModel& model, ModelIndex& index, int first, int last) {
  std::vector<int> rows;
  const int L = index.line_on.rows();
  if (budget.mode == BudgetMode::kNone) return rows;
  validate_budget(budget, L);
  if (static_cast<int>(lines.size()) != L) {
    throw DimensionMismatch("risk budget: " + std::to_string(lines.size()) +
                            " line risks for " + std::to_string(L) + " lines");
  }
  if (budget.mode == BudgetMode::kWfpiSlack) index.slack.assign(index.line_on.cols(), -1);
  for (int t = first; t < last; ++t) {
    std::vector<Term> terms;
    const std::string name = std::string("budget_") + std::to_string(t + 1);
    switch (budget.mode) {
      case BudgetMode::kNone:
        break;
      case BudgetMode::kNMinusK:
        for (int l = 0; l < L; ++l) terms.push_back({var(index.line_on(l, t)), 1.0});
        rows.push_back(model.add_constraint(name, std::move(terms), Sense::kLessEqual,
                                            static_cast<double>(L - budget.k)));
        break;
      case BudgetMode::kWfpiSum:
        for (int l = 0; l < L; ++l) {
          if (lines[l].metric_value != 0.0) {
            terms.push_back({var(index.line_on(l, t)), lines[l].metric_value});
          }
        }
        rows.push_back(model.add_constraint(name, std::move(terms), Sense::kLessEqual,
                                            budget.r_tol));
        break;
      case BudgetMode::kWfpiSlack: {
        const VarId s = model.add_variable("r_slack_" + std::to_string(t + 1), 0.0,
                                           budget.r_slack_max);
        model.set_objective(s, budget.slack_penalty);
        index.slack[t] = s.index;
        for (int l = 0; l < L; ++l) {
          if (lines[l].metric_value != 0.0) {
            terms.push_back({var(index.line_on(l, t)), lines[l].metric_value});
          }
        }
        terms.push_back({s, -1.0});
        rows.push_back(
            model.add_constraint(name, std::move(terms), Sense::kEqual, budget.r_tol));
        break;
      }
      case BudgetMode::kLogWip: {
        double rhs = std::log(budget.pi_tol);
        for (int l = 0; l < L; ++l) {
          const LineRisk& r = lines[l];
          if (r.pi[t] <= 0.0) continue;  // zero-risk lines never enter
          if (budget.log_form == LogWipForm::kCumulative) {
            // (1 - z) ln pi + z ln(1 - pi)
            terms.push_back({var(index.line_on(l, t)), r.log_one_minus_pi[t] - r.log_pi[t]});
            rhs -= r.log_pi[t];
          } else {
            terms.push_back({var(index.line_down(l, t)), r.log_pi[t]});
            terms.push_back({var(index.line_on(l, t)), r.log_one_minus_pi[t]});
          }
        }
        rows.push_back(model.add_constraint(name, std::move(terms), Sense::kLessEqual, rhs));
        break;
      }
    }
  }
  index.budget_rows.insert(index.budget_rows.end(), rows.begin(), rows.end());
  return rows;
}

std::vector<LineRisk> budget_line_risk(const PowerNetwork& net, const ScenarioSet& scenarios,
                                       const std::vector<double>& line_metric) {
  const Scenario mean = expected_scenario(scenarios);
  std::vector<LineRisk> out;
  for (int l = 0; l < net.num_lines(); ++l) {
    const double m = line_metric.empty() ? 0.0 : line_metric.at(l);
    out.push_back(make_line_risk(net.lines[l].id, mean.line_pi.at(l), net.horizon, m));
  }
  return out;
}

DayAheadModel build_day_ahead(const PowerNetwork& net, const ScenarioSet& scenarios,
                              const RiskBudget& budget,
                              const std::vector<LineRisk>& budget_lines,
                              const BuildOptions& opt) {
  const int H = net.horizon;
  const int G = net.num_generators(), L = net.num_lines(), N = net.num_buses(),
            D = net.num_demands();
  const int W = scenarios.size();
  const int T0 = opt.first_step;
  const int T1 = opt.last_step < 0 ? H : opt.last_step;
  const bool fixed = opt.fixed_plan != nullptr;
  const double dt = net.step_hours;

  if (W == 0) throw ConfigError("day-ahead model needs at least one scenario");
  if (T0 < 0 || T1 > H || T0 >= T1) throw ConfigError("invalid step window");
  if ((T0 > 0 || T1 < H) && !fixed) throw ConfigError("step windows require a fixed plan");
  if (T0 > 0 && static_cast<int>(opt.initial_aux.size()) != G) {
    throw ConfigError("window after the first step needs one initial_aux per generator");
  }
  if (!(opt.theta_bound > 0.0)) throw ConfigError("theta_bound must be positive");
  if (!fixed) validate_budget(budget, L);
  const bool use_cvar = opt.cvar.has_value() && opt.cvar->beta > 0.0;
  if (opt.cvar) {
    if (!(opt.cvar->beta >= 0.0 && opt.cvar->beta <= 1.0)) {
      throw ConfigError("cvar: beta must be in [0,1]");
    }
    if (!(opt.cvar->epsilon >= 0.0 && opt.cvar->epsilon < 1.0)) {
      throw ConfigError("cvar: epsilon must be in [0,1)");
    }
    if (W < 2) throw ConfigError("cvar objective needs at least two scenarios");
  }
  for (const Scenario& s : scenarios.scenarios) {
    if (s.demand.rows() != D || s.demand.cols() != H) {
      throw DimensionMismatch("scenario " + std::to_string(s.id) +
                              ": demand must be demands x horizon");
    }
  }
  if (fixed) {
    const CommitmentPlan& p = *opt.fixed_plan;
    if (p.gen_on.rows() != G || p.gen_on.cols() != H || p.line_on.rows() != L ||
        p.line_on.cols() != H || p.gen_up.rows() != G || p.line_down.rows() != L) {
      throw DimensionMismatch("fixed plan does not match the network");
    }
  }
  check_size(net, W, T1 - T0, fixed, opt.spill);

  DayAheadModel out;
  MilpModel& m = out.model;
  ModelIndex& ix = out.index;
  ix.first_step = T0;
  ix.last_step = T1;
  ix.gen_on = Matrix<int>(G, H, -1);
  ix.gen_up = Matrix<int>(G, H, -1);
  ix.gen_down = Matrix<int>(G, H, -1);
  ix.line_on = Matrix<int>(L, H, -1);
  ix.line_down = Matrix<int>(L, H, -1);

  // First stage.
  for (int g = 0; g < G; ++g) {
    const int id = net.generators[g].id;
    for (int t = T0; t < T1; ++t) {
      ix.gen_on(g, t) = m.add_binary(tag("z_g", id, t)).index;
      ix.gen_up(g, t) = m.add_binary(tag("zup_g", id, t)).index;
      ix.gen_down(g, t) = m.add_binary(tag("zdn_g", id, t)).index;
    }
  }
  for (int l = 0; l < L; ++l) {
    const int id = net.lines[l].id;
    for (int t = T0; t < T1; ++t) {
      ix.line_on(l, t) = m.add_binary(tag("z_l", id, t)).index;
      ix.line_down(l, t) = m.add_binary(tag("zdn_l", id, t)).index;
    }
  }

  if (fixed) {
    const CommitmentPlan& p = *opt.fixed_plan;
    for (int g = 0; g < G; ++g) {
      for (int t = T0; t < T1; ++t) {
        m.fix(var(ix.gen_on(g, t)), p.gen_on(g, t));
        m.fix(var(ix.gen_up(g, t)), p.gen_up(g, t));
        m.fix(var(ix.gen_down(g, t)), p.gen_down(g, t));
      }
    }
    for (int l = 0; l < L; ++l) {
      for (int t = T0; t < T1; ++t) {
        m.fix(var(ix.line_on(l, t)), p.line_on(l, t));
        m.fix(var(ix.line_down(l, t)), p.line_down(l, t));
      }
    }
  } else {
    for (int g = 0; g < G; ++g) {
      const Generator& gen = net.generators[g];
      for (int t = 0; t < H; ++t) {
        std::vector<Term> up{{var(ix.gen_on(g, t)), 1.0}};
        std::vector<Term> dn{{var(ix.gen_on(g, t)), 1.0}};
        for (int s = std::max(0, t - gen.min_up); s <= t; ++s) {
          up.push_back({var(ix.gen_up(g, s)), -1.0});
        }
        for (int s = std::max(0, t - gen.min_down); s <= t; ++s) {
          dn.push_back({var(ix.gen_down(g, s)), 1.0});
        }
        m.add_constraint(tag("minup_g", gen.id, t), std::move(up), Sense::kGreaterEqual, 0.0);
        m.add_constraint(tag("mindn_g", gen.id, t), std::move(dn), Sense::kLessEqual, 1.0);
        std::vector<Term> tr{{var(ix.gen_on(g, t)), 1.0},
                             {var(ix.gen_up(g, t)), -1.0},
                             {var(ix.gen_down(g, t)), 1.0}};
        double rhs = 0.0;
        if (t > 0) {
          tr.push_back({var(ix.gen_on(g, t - 1)), -1.0});
        } else {
          rhs = gen.initially_on ? 1.0 : 0.0;
        }
        m.add_constraint(tag("trans_g", gen.id, t), std::move(tr), Sense::kEqual, rhs);
      }
    }
    for (int l = 0; l < L; ++l) {
      const int id = net.lines[l].id;
      for (int t = 0; t < H; ++t) {
        std::vector<Term> dn{{var(ix.line_down(l, t)), 1.0}, {var(ix.line_on(l, t)), 1.0}};
        double rhs = 1.0;
        if (t > 0) {
          dn.push_back({var(ix.line_on(l, t - 1)), -1.0});
          rhs = 0.0;
          m.add_constraint(tag("persist_l", id, t),
                           {{var(ix.line_on(l, t - 1)), 1.0}, {var(ix.line_on(l, t)), -1.0}},
                           Sense::kGreaterEqual, 0.0);
        }
        m.add_constraint(tag("down_l", id, t), std::move(dn), Sense::kEqual, rhs);
      }
    }
    emit_risk_budget(budget_lines, budget, m, ix, 0, H);
  }

  // Second stage, per scenario.
  const int ref = reference_bus(net);
  const double tb = opt.theta_bound;
  const double beta = use_cvar ? opt.cvar->beta : 0.0;
  double uc_weight = 0.0;
  if (use_cvar) {
    ix.nu = m.add_variable("cvar_nu", -kInf, kInf).index;
    m.set_objective(var(ix.nu), beta);
  }
  for (int w = 0; w < W; ++w) {
    const Scenario& sc = scenarios.scenarios[w];
    const double weight = (1.0 - beta) * sc.probability;
    uc_weight += weight;
    ScenarioVars sv;
    sv.p_gen = Matrix<int>(G, H, -1);
    sv.p_aux = Matrix<int>(G, H, -1);
    sv.flow = Matrix<int>(L, H, -1);
    sv.theta = Matrix<int>(N, H, -1);
    sv.served = Matrix<int>(D, H, -1);
    sv.spill = Matrix<int>(N, H, -1);
    // Pi_w = (cost terms) + constant; collected for the CVaR row.
    std::vector<Term> pi_terms;
    double pi_const = 0.0;

    for (int g = 0; g < G; ++g) {
      const Generator& gen = net.generators[g];
      for (int t = T0; t < T1; ++t) {
        const VarId p = m.add_variable(tag("p_g", gen.id, t, sc.id), 0.0, gen.p_max);
        double lo = -gen.p_max, hi = 0.0;
        if (t == 0 && !gen.initially_on) {
          lo = std::max(lo, gen.ramp_down);
          hi = std::min(hi, gen.ramp_up);
        } else if (t == T0 && t > 0) {
          lo = std::max(lo, opt.initial_aux[g] + gen.ramp_down);
          hi = std::min(hi, opt.initial_aux[g] + gen.ramp_up);
        }
        const VarId a = m.add_variable(tag("paux_g", gen.id, t, sc.id), lo, hi);
        sv.p_gen(g, t) = p.index;
        sv.p_aux(g, t) = a.index;
        const VarId z = var(ix.gen_on(g, t));
        m.add_constraint(tag("pmax_g", gen.id, t, sc.id), {{p, 1.0}, {z, -gen.p_max}},
                         Sense::kLessEqual, 0.0);
        m.add_constraint(tag("pmin_g", gen.id, t, sc.id), {{p, 1.0}, {z, -gen.p_min}},
                         Sense::kGreaterEqual, 0.0);
        m.add_constraint(tag("aux_g", gen.id, t, sc.id), {{a, 1.0}, {p, -1.0}, {z, gen.p_max}},
                         Sense::kEqual, 0.0);
        if (t > T0) {
          const VarId prev = var(sv.p_aux(g, t - 1));
          m.add_constraint(tag("rampup_g", gen.id, t, sc.id), {{a, 1.0}, {prev, -1.0}},
                           Sense::kLessEqual, gen.ramp_up);
          m.add_constraint(tag("rampdn_g", gen.id, t, sc.id), {{a, 1.0}, {prev, -1.0}},
                           Sense::kGreaterEqual, gen.ramp_down);
        }
        const double c = gen.marginal_cost * dt;
        m.add_objective(p, weight * c);
        if (c != 0.0) pi_terms.push_back({p, c});
      }
    }
    for (int b = 0; b < N; ++b) {
      const int id = net.buses[b].id;
      for (int t = T0; t < T1; ++t) {
        const double bound = id == ref ? 0.0 : kInf;
        sv.theta(b, t) = m.add_variable(tag("theta", id, t, sc.id), -bound, bound).index;
        if (opt.spill) {
          const VarId s = m.add_variable(tag("spill", id, t, sc.id), 0.0, kInf);
          sv.spill(b, t) = s.index;
          m.add_objective(s, weight * opt.spill_penalty * dt);
          pi_terms.push_back({s, opt.spill_penalty * dt});
        }
      }
    }
    for (int l = 0; l < L; ++l) {
      const Line& line = net.lines[l];
      const double B = line.susceptance;
      for (int t = T0; t < T1; ++t) {
        const VarId f = m.add_variable(tag("p_l", line.id, t, sc.id), line.flow_min,
                                       line.flow_max);
        sv.flow(l, t) = f.index;
        const VarId z = var(ix.line_on(l, t));
        const VarId ti = var(sv.theta(net.bus_index(line.from_bus), t));
        const VarId tj = var(sv.theta(net.bus_index(line.to_bus), t));
        m.add_constraint(tag("flowub_l", line.id, t, sc.id),
                         {{f, 1.0}, {ti, -B}, {tj, B}, {z, B * tb}}, Sense::kLessEqual, B * tb);
        m.add_constraint(tag("flowlb_l", line.id, t, sc.id),
                         {{f, 1.0}, {ti, -B}, {tj, B}, {z, -B * tb}}, Sense::kGreaterEqual,
                         -B * tb);
        m.add_constraint(tag("thermub_l", line.id, t, sc.id), {{f, 1.0}, {z, -line.flow_max}},
                         Sense::kLessEqual, 0.0);
        m.add_constraint(tag("thermlb_l", line.id, t, sc.id), {{f, 1.0}, {z, -line.flow_min}},
                         Sense::kGreaterEqual, 0.0);
      }
    }
    for (int d = 0; d < D; ++d) {
      const Demand& dem = net.demands[d];
      for (int t = T0; t < T1; ++t) {
        const double load = sc.demand(d, t);
        const VarId s = m.add_variable(tag("served_d", dem.id, t, sc.id), 0.0, load);
        sv.served(d, t) = s.index;
        const double c = dem.voll * dt;
        m.add_objective(s, -weight * c);
        m.add_objective_offset(weight * c * load);
        pi_terms.push_back({s, -c});
        pi_const += c * load;
      }
    }
    // Bus balance.
    std::vector<std::vector<Term>> rows(N);
    for (int t = T0; t < T1; ++t) {
      for (auto& r : rows) r.clear();
      for (int g = 0; g < G; ++g) {
        rows[net.bus_index(net.generators[g].bus)].push_back({var(sv.p_gen(g, t)), 1.0});
      }
      for (int l = 0; l < L; ++l) {
        const VarId f = var(sv.flow(l, t));
        rows[net.bus_index(net.lines[l].from_bus)].push_back({f, -1.0});
        rows[net.bus_index(net.lines[l].to_bus)].push_back({f, 1.0});
      }
      for (int d = 0; d < D; ++d) {
        rows[net.bus_index(net.demands[d].bus)].push_back({var(sv.served(d, t)), -1.0});
      }
      for (int b = 0; b < N; ++b) {
        if (opt.spill) rows[b].push_back({var(sv.spill(b, t)), -1.0});
        m.add_constraint(tag("balance", net.buses[b].id, t, sc.id), rows[b], Sense::kEqual, 0.0);
      }
    }
    if (use_cvar) {
      const VarId gamma = m.add_variable("cvar_gamma_s" + std::to_string(sc.id), 0.0, kInf);
      ix.gamma.push_back(gamma.index);
      m.set_objective(gamma, beta * sc.probability / (1.0 - opt.cvar->epsilon));
      std::vector<Term> row{{gamma, 1.0}, {var(ix.nu), 1.0}};
      for (const Term& term : pi_terms) row.push_back({term.var, -term.coef});
      if (opt.include_uc) {
        for (int g = 0; g < G; ++g) {
          const Generator& gen = net.generators[g];
          for (int t = T0; t < T1; ++t) {
            if (gen.startup_cost != 0.0) row.push_back({var(ix.gen_up(g, t)), -gen.startup_cost});
            if (gen.shutdown_cost != 0.0) {
              row.push_back({var(ix.gen_down(g, t)), -gen.shutdown_cost});
            }
          }
        }
      }
      m.add_constraint("cvar_tail_s" + std::to_string(sc.id), std::move(row),
                       Sense::kGreaterEqual, pi_const);
    }
    ix.scenarios.push_back(std::move(sv));
  }
  if (opt.include_uc) {
    for (int g = 0; g < G; ++g) {
      const Generator& gen = net.generators[g];
      for (int t = T0; t < T1; ++t) {
        m.add_objective(var(ix.gen_up(g, t)), uc_weight * gen.startup_cost);
        m.add_objective(var(ix.gen_down(g, t)), uc_weight * gen.shutdown_cost);
      }
    }
  }
  return out;
}

CommitmentPlan extract_plan(const DayAheadModel& dm, const std::vector<double>& x,
                            const PowerNetwork& net) {
  const ModelIndex& ix = dm.index;
  CommitmentPlan p;
  const int H = net.horizon;
  auto take = [&](const Matrix<int>& idx) {
    Matrix<std::int8_t> out(idx.rows(), H);
    for (int r = 0; r < idx.rows(); ++r) {
      for (int t = 0; t < H; ++t) {
        if (idx(r, t) >= 0) out(r, t) = x[idx(r, t)] > 0.5 ? 1 : 0;
      }
    }
    return out;
  };
  p.gen_on = take(ix.gen_on);
  p.gen_up = take(ix.gen_up);
  p.gen_down = take(ix.gen_down);
  p.line_on = take(ix.line_on);
  p.line_down = take(ix.line_down);
  return p;
}

DispatchSolution extract_dispatch(const DayAheadModel& dm, const std::vector<double>& x,
                                  const PowerNetwork& net, const ScenarioSet& scenarios) {
  const int H = net.horizon;
  auto take = [&](const Matrix<int>& idx) {
    Matrix<double> out(idx.rows(), H);
    for (int r = 0; r < idx.rows(); ++r) {
      for (int t = 0; t < H; ++t) {
        if (idx(r, t) >= 0) out(r, t) = x[idx(r, t)];
      }
    }
    return out;
  };
  DispatchSolution sol;
  for (std::size_t w = 0; w < dm.index.scenarios.size(); ++w) {
    const ScenarioVars& sv = dm.index.scenarios[w];
    ScenarioDispatch d;
    d.p_gen = take(sv.p_gen);
    d.p_aux = take(sv.p_aux);
    d.flow = take(sv.flow);
    d.theta = take(sv.theta);
    d.spill = take(sv.spill);
    const Matrix<double> served_mw = take(sv.served);
    d.served = Matrix<double>(served_mw.rows(), H, 1.0);
    const Scenario& sc = scenarios.scenarios[w];
    for (int r = 0; r < served_mw.rows(); ++r) {
      for (int t = dm.index.first_step; t < dm.index.last_step; ++t) {
        const double load = sc.demand(r, t);
        d.served(r, t) = load > 0.0 ? std::clamp(served_mw(r, t) / load, 0.0, 1.0) : 1.0;
      }
    }
    sol.scenarios.push_back(std::move(d));
  }
  return sol;
}

CostBreakdown evaluate_costs(const PowerNetwork& net, const CommitmentPlan& plan,
                             const DispatchSolution& dispatch, const ScenarioSet& scenarios,
                             const std::optional<CvarConfig>& cvar_config, double slack_cost,
                             double spill_penalty) {
  const int H = net.horizon;
  const int G = net.num_generators(), D = net.num_demands();
  if (plan.gen_up.rows() != G || plan.gen_up.cols() != H || plan.gen_down.rows() != G ||
      plan.gen_down.cols() != H) {
    throw DimensionMismatch("evaluate_costs: plan does not match the network");
  }
  if (dispatch.scenarios.size() != scenarios.scenarios.size()) {
    throw DimensionMismatch("evaluate_costs: one dispatch per scenario required");
  }
  const double dt = net.step_hours;
  CostBreakdown c;
  for (int g = 0; g < G; ++g) {
    for (int t = 0; t < H; ++t) {
      c.uc += net.generators[g].startup_cost * plan.gen_up(g, t) +
              net.generators[g].shutdown_cost * plan.gen_down(g, t);
    }
  }
  for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
    const Scenario& sc = scenarios.scenarios[w];
    const ScenarioDispatch& d = dispatch.scenarios[w];
    if (d.p_gen.rows() != G || d.p_gen.cols() != H || d.served.rows() != D ||
        d.served.cols() != H || sc.demand.rows() != D || sc.demand.cols() != H) {
      throw DimensionMismatch("evaluate_costs: dispatch of scenario " + std::to_string(sc.id) +
                              " has the wrong shape");
    }
    double oc = 0.0, voll = 0.0, spill = 0.0;
    for (int g = 0; g < G; ++g) {
      for (int t = 0; t < H; ++t) oc += net.generators[g].marginal_cost * d.p_gen(g, t) * dt;
    }
    for (int k = 0; k < D; ++k) {
      for (int t = 0; t < H; ++t) {
        voll += net.demands[k].voll * (1.0 - d.served(k, t)) * sc.demand(k, t) * dt;
      }
    }
    if (!d.spill.empty()) {
      for (double v : d.spill.data()) spill += spill_penalty * v * dt;
    }
    c.oc += sc.probability * oc;
    c.voll += sc.probability * voll;
    c.spill += sc.probability * spill;
    c.per_scenario.push_back(c.uc + oc + voll + spill);
    c.probabilities.push_back(sc.probability);
  }
  c.slack_penalty = slack_cost;
  c.total = c.uc + c.oc + c.voll + c.spill + c.slack_penalty;
  c.beta = cvar_config ? cvar_config->beta : 0.0;
  c.epsilon = cvar_config ? cvar_config->epsilon : 0.95;
  const MeanRiskValue mr = mean_risk(c.per_scenario, c.probabilities, c.beta, c.epsilon);
  c.mean = mr.mean;
  c.cvar = mr.cvar;
  c.mean_cvar_objective = mr.combined + c.slack_penalty;
  return c;
}

std::vector<double> plan_start_vector(const DayAheadModel& dm, const CommitmentPlan& plan) {
  std::vector<double> x(dm.model.num_variables(), 0.0);
  auto put = [&](const Matrix<int>& ix, const Matrix<std::int8_t>& v) {
    for (int r = 0; r < ix.rows(); ++r) {
      for (int t = dm.index.first_step; t < dm.index.last_step; ++t) {
        if (ix(r, t) >= 0) x[ix(r, t)] = v(r, t);
      }
    }
  };
  put(dm.index.gen_on, plan.gen_on);
  put(dm.index.gen_up, plan.gen_up);
  put(dm.index.gen_down, plan.gen_down);
  put(dm.index.line_on, plan.line_on);
  put(dm.index.line_down, plan.line_down);
  return x;
}

namespace {

bool rows_hold(const milp::MilpModel& model, const std::vector<int>& rows,
               const std::vector<double>& x) {
  for (int i : rows) {
    const milp::Constraint& c = model.constraint(i);
    double lhs = 0.0;
    for (const Term& term : c.terms) lhs += term.coef * x[term.var.index];
    const double tol = 1e-9 * std::max(1.0, std::abs(c.rhs));
    if (c.sense != milp::Sense::kGreaterEqual && lhs > c.rhs + tol) return false;
    if (c.sense != milp::Sense::kLessEqual && lhs < c.rhs - tol) return false;
  }
  return true;
}

// Solves the continuous part with every binary fixed to its value in `x`;
// empty when that is infeasible.
std::vector<double> complete_start(const MilpModel& model, const std::vector<double>& x) {
  MilpModel fixed = model;
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.variable(j).kind == milp::VarKind::kBinary) fixed.fix(VarId{j}, std::round(x[j]));
  }
  const milp::MilpSolution sol = milp::solve_lp(fixed);
  return sol.has_solution() ? sol.values : std::vector<double>{};
}

// Relax and fix: lines stay energized up to a shutdown step. Line steps
// are taken in order of their root LP values, each extending its line's
// energized prefix while the budget rows hold; the commitment is then
// solved with the lines fixed. Returns an empty vector when no start is
// found.
std::vector<double> relax_and_fix_start(const PowerNetwork& net, const DayAheadModel& dm,
                                        const std::vector<LineRisk>& budget_lines,
                                        const milp::SolveLimits& limits) {
  const ModelIndex& ix = dm.index;
  const int L = net.num_lines();
  const int H = net.horizon;
  const milp::MilpSolution root = milp::solve_lp(dm.model);
  if (!root.has_solution()) return {};

  struct Candidate {
    double z;
    int line;
    int step;
  };
  std::vector<Candidate> order;
  CommitmentPlan plan = uniform_plan(net, false);
  for (int l = 0; l < L; ++l) {
    bool has_risk = budget_lines[l].metric_value > 0.0;
    for (int t = 0; t < H; ++t) has_risk = has_risk || budget_lines[l].pi[t] > 0.0;
    if (!has_risk) continue;
    for (int t = 0; t < H; ++t) {
      plan.line_on(l, t) = 0;
      order.push_back({root.values[ix.line_on(l, t)], l, t});
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Candidate& a, const Candidate& b) { return a.z > b.z; });
  derive_transitions(plan, net);
  if (!rows_hold(dm.model, ix.budget_rows, plan_start_vector(dm, plan))) return {};
  for (const Candidate& c : order) {
    if (plan.line_on(c.line, c.step)) continue;
    CommitmentPlan trial = plan;
    for (int t = 0; t <= c.step; ++t) trial.line_on(c.line, t) = 1;
    derive_transitions(trial, net);
    if (rows_hold(dm.model, ix.budget_rows, plan_start_vector(dm, trial))) plan = trial;
  }

  milp::MilpModel fixed = dm.model;
  for (int l = 0; l < L; ++l) {
    for (int t = 0; t < H; ++t) {
      fixed.fix(VarId{ix.line_on(l, t)}, plan.line_on(l, t));
      fixed.fix(VarId{ix.line_down(l, t)}, plan.line_down(l, t));
    }
  }
  const milp::MilpSolution sol = milp::solve_milp(fixed, limits);
  return sol.has_solution() ? sol.values : std::vector<double>{};
}

}  // namespace

DayAheadResult solve_day_ahead(const PowerNetwork& net, const ScenarioSet& scenarios,
                               const RiskBudget& budget,
                               const std::vector<LineRisk>& budget_lines,
                               const BuildOptions& options, const milp::SolveLimits& limits,
                               const CommitmentPlan* start) {
  const DayAheadModel dm = build_day_ahead(net, scenarios, budget, budget_lines, options);
  std::vector<double> x0;
  if (!options.fixed_plan && budget.mode != BudgetMode::kNone &&
      budget.mode != BudgetMode::kWfpiSlack && dm.model.num_binaries() > 0) {
    x0 = relax_and_fix_start(net, dm, budget_lines, limits);
  }
  if (start && !options.fixed_plan) {
    // Keep whichever of the given plan and the heuristic start is cheaper.
    std::vector<double> given = complete_start(dm.model, plan_start_vector(dm, *start));
    if (!given.empty() &&
        (x0.empty() || dm.model.evaluate_objective(given) < dm.model.evaluate_objective(x0))) {
      x0 = std::move(given);
    }
  }
  const milp::MilpSolution sol = milp::solve_milp(dm.model, limits, x0);
  DayAheadResult r;
  r.status = sol.status;
  r.num_variables = dm.model.num_variables();
  r.num_constraints = dm.model.num_constraints();
  r.num_binaries = dm.model.num_binaries();
  r.nodes = sol.nodes;
  r.gap = sol.gap;
  if (!sol.has_solution()) {
    std::string msg = std::string("day-ahead problem ") + milp::to_string(sol.status);
    if (sol.status == milp::SolveStatus::kInfeasible && budget.mode != BudgetMode::kNone &&
        !options.fixed_plan) {
      // Everything off with every line energized and all load shed is
      // always feasible without a budget, so the budget is the cause.
      msg += ": risk budget (" + std::string(to_string(budget.mode)) + ") cannot be met";
    }
    throw SolveFailed(msg, milp::to_string(sol.status));
  }
  r.plan = extract_plan(dm, sol.values, net);
  if (options.fixed_plan) r.plan = *options.fixed_plan;
  r.dispatch = extract_dispatch(dm, sol.values, net, scenarios);
  double slack_cost = 0.0;
  for (int s : dm.index.slack) {
    if (s >= 0) slack_cost += budget.slack_penalty * sol.values[s];
  }
  r.costs = evaluate_costs(net, r.plan, r.dispatch, scenarios, options.cvar, slack_cost,
                           options.spill_penalty);
  r.objective = sol.objective;
  return r;
}

double budget_slack_cost(const CommitmentPlan& plan, const RiskBudget& budget,
                         const std::vector<LineRisk>& lines) {
  if (budget.mode != BudgetMode::kWfpiSlack) return 0.0;
  double cost = 0.0;
  for (int t = 0; t < plan.line_on.cols(); ++t) {
    double risk = 0.0;
    for (int l = 0; l < plan.line_on.rows(); ++l) risk += plan.line_on(l, t) * lines[l].metric_value;
    cost += budget.slack_penalty * std::max(0.0, risk - budget.r_tol);
  }
  return cost;
}

int energized_risky_lines(const CommitmentPlan& plan, const std::vector<LineRisk>& lines,
                          int t) {
  int count = 0;
  for (int l = 0; l < plan.line_on.rows(); ++l) {
    if (lines[l].pi[t] > 0.0 && plan.line_on(l, t)) ++count;
  }
  return count;
}

double mean_nzr_active_lines(const CommitmentPlan& plan, const std::vector<LineRisk>& lines) {
  const int H = plan.line_on.cols();
  if (H == 0) return 0.0;
  double total = 0.0;
  for (int t = 0; t < H; ++t) total += energized_risky_lines(plan, lines, t);
  return total / H;
}

double demand_served_mwh(const PowerNetwork& net, const DispatchSolution& dispatch,
                         const ScenarioSet& scenarios) {
  double total = 0.0;
  for (std::size_t w = 0; w < dispatch.scenarios.size(); ++w) {
    const Scenario& sc = scenarios.scenarios[w];
    const ScenarioDispatch& d = dispatch.scenarios[w];
    for (int k = 0; k < d.served.rows(); ++k) {
      for (int t = 0; t < d.served.cols(); ++t) {
        total += sc.probability * d.served(k, t) * sc.demand(k, t) * net.step_hours;
      }
    }
  }
  return total;
}

namespace {

nlohmann::json rows_json(const Matrix<std::int8_t>& m) {
  nlohmann::json out = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    std::vector<int> row(m.cols());
    for (int t = 0; t < m.cols(); ++t) row[t] = m(r, t);
    out.push_back(row);
  }
  return out;
}

Matrix<std::int8_t> rows_from_json(const nlohmann::json& j, int rows, int cols,
                                   const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw ParseError(std::string("plan: '") + what + "' must have " + std::to_string(rows) +
                     " rows");
  }
  Matrix<std::int8_t> m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto row = j[r].get<std::vector<int>>();
    if (static_cast<int>(row.size()) != cols) {
      throw ParseError(std::string("plan: '") + what + "' rows must have " +
                       std::to_string(cols) + " steps");
    }
    for (int t = 0; t < cols; ++t) {
      if (row[t] != 0 && row[t] != 1) throw ParseError(std::string("plan: '") + what + "' not binary");
      m(r, t) = static_cast<std::int8_t>(row[t]);
    }
  }
  return m;
}

}  // namespace

std::string plan_to_json(const CommitmentPlan& plan, const PowerNetwork& net) {
  nlohmann::json j;
  j["horizon"] = net.horizon;
  std::vector<int> gids, lids;
  for (const Generator& g : net.generators) gids.push_back(g.id);
  for (const Line& l : net.lines) lids.push_back(l.id);
  j["generator_ids"] = gids;
  j["line_ids"] = lids;
  j["gen_on"] = rows_json(plan.gen_on);
  j["line_on"] = rows_json(plan.line_on);
  return j.dump(2) + "\n";
}

CommitmentPlan parse_plan(const std::string& text, const PowerNetwork& net) {
  CommitmentPlan p;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("horizon").get<int>() != net.horizon) {
      throw ParseError("plan: horizon does not match the network");
    }
    p.gen_on = rows_from_json(j.at("gen_on"), net.num_generators(), net.horizon, "gen_on");
    p.line_on = rows_from_json(j.at("line_on"), net.num_lines(), net.horizon, "line_on");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("plan: ") + e.what());
  }
  derive_transitions(p, net);
  return p;
}

std::string commitments_csv(const CommitmentPlan& plan, const PowerNetwork& net) {
  std::ostringstream os;
  os << "generator,step,on,startup,shutdown\n";
  for (int g = 0; g < net.num_generators(); ++g) {
    for (int t = 0; t < net.horizon; ++t) {
      os << net.generators[g].id << ',' << t + 1 << ',' << int(plan.gen_on(g, t)) << ','
         << int(plan.gen_up(g, t)) << ',' << int(plan.gen_down(g, t)) << '\n';
    }
  }
  return os.str();
}

std::string energizations_csv(const CommitmentPlan& plan, const PowerNetwork& net) {
  std::ostringstream os;
  os << "line,step,on,shutdown\n";
  for (int l = 0; l < net.num_lines(); ++l) {
    for (int t = 0; t < net.horizon; ++t) {
      os << net.lines[l].id << ',' << t + 1 << ',' << int(plan.line_on(l, t)) << ','
         << int(plan.line_down(l, t)) << '\n';
    }
  }
  return os.str();
}

std::string dispatch_csv(const DispatchSolution& dispatch, const PowerNetwork& net) {
  std::ostringstream os;
  os << "scenario,generator,step,p_mw\n";
  for (std::size_t w = 0; w < dispatch.scenarios.size(); ++w) {
    const auto& d = dispatch.scenarios[w];
    for (int g = 0; g < net.num_generators(); ++g) {
      for (int t = 0; t < net.horizon; ++t) {
        os << w + 1 << ',' << net.generators[g].id << ',' << t + 1 << ','
           << format_double(d.p_gen(g, t)) << '\n';
      }
    }
  }
  return os.str();
}

std::string costs_to_json(const CostBreakdown& c) {
  nlohmann::json j;
  j["uc"] = c.uc;
  j["oc"] = c.oc;
  j["voll"] = c.voll;
  j["spill"] = c.spill;
  j["slack_penalty"] = c.slack_penalty;
  j["total"] = c.total;
  j["per_scenario"] = c.per_scenario;
  j["probabilities"] = c.probabilities;
  j["mean"] = c.mean;
  j["cvar"] = c.cvar;
  j["beta"] = c.beta;
  j["epsilon"] = c.epsilon;
  j["mean_cvar_objective"] = c.mean_cvar_objective;
  return j.dump(2) + "\n";
}

}  // namespace psps
