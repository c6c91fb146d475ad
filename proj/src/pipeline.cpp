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

#include "psps/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "json.hpp"
#include "psps/csv.hpp"
#include "psps/error.hpp"

#ifndef PSPS_VERSION
#define PSPS_VERSION "0.0.0"
#endif

namespace psps {

namespace fs = std::filesystem;
using nlohmann::json;

const char* tool_version() { return PSPS_VERSION; }

milp::SolveLimits SolverConfig::limits() const {
  milp::SolveLimits l;
  l.relative_gap = relative_gap;
  l.max_nodes = max_nodes;
  if (time_limit_seconds > 0.0) l.time_limit_seconds = time_limit_seconds;
  return l;
}

const MetricConfig& RunConfig::metric_config() const {
  const auto& m = risk[static_cast<int>(metric)];
  if (!m) throw ConfigError(std::string("no risk block for metric '") + to_string(metric) + "'");
  return *m;
}

namespace {

// Rejects keys outside `allowed` so that typos surface as config errors.
void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, const std::string& where, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

fs::path get_path(const json& j, const char* key, const std::string& where,
                  const fs::path& base) {
  std::string s = get_or<std::string>(j, key, where, "");
  if (s.empty()) return {};
  fs::path p(s);
  return p.is_absolute() ? p : base / p;
}

RiskSource parse_source(const json& j, const std::string& where, const fs::path& base) {
  check_keys(j, where, {"line_risk", "raster"});
  RiskSource s;
  s.line_risk = get_path(j, "line_risk", where, base);
  s.raster = get_path(j, "raster", where, base);
  if (!s.line_risk.empty() && !s.raster.empty())
    throw ConfigError(where + " must name either line_risk or raster, not both");
  return s;
}

LineAggregation parse_aggregation(const std::string& s) {
  if (s == "cell-product") return LineAggregation::kCellProduct;
  if (s == "endpoint-max") return LineAggregation::kEndpointMax;
  throw ConfigError("unknown aggregation '" + s + "' (expected cell-product or endpoint-max)");
}

MetricConfig parse_metric_block(const json& j, const std::string& where, const fs::path& base) {
  check_keys(j, where, {"reliability_table", "aggregation", "day_ahead", "real_time"});
  MetricConfig m;
  m.reliability_table = get_path(j, "reliability_table", where, base);
  m.aggregation = parse_aggregation(get_or<std::string>(j, "aggregation", where, "cell-product"));
  if (j.contains("day_ahead")) m.day_ahead = parse_source(j["day_ahead"], where + ".day_ahead", base);
  if (j.contains("real_time")) m.real_time = parse_source(j["real_time"], where + ".real_time", base);
  if (m.day_ahead.empty()) throw ConfigError(where + ".day_ahead is required");
  if (m.real_time.empty()) m.real_time = m.day_ahead;
  return m;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir,
                           const ConfigOverrides& overrides) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "config",
             {"network", "metric", "risk", "scenarios", "budget", "cvar", "theta_bound", "spill",
              "solver", "real_time", "sweep", "analysis", "seed", "out"});

  // Overrides land in the JSON so that the canonical text reflects them.
  if (overrides.seed) root["seed"] = *overrides.seed;
  if (overrides.metric) root["metric"] = to_string(*overrides.metric);
  if (overrides.out) root["out"] = overrides.out->string();
  if (overrides.samples) root["real_time"]["samples"] = *overrides.samples;
  if (overrides.onset) root["real_time"]["onset"] = to_string(*overrides.onset);

  RunConfig c;
  c.base_dir = base_dir;
  // The output location does not change results, so it stays out of the hash.
  json hashed = root;
  hashed.erase("out");
  c.canonical = hashed.dump();

  c.network = get_path(root, "network", "config", base_dir);
  if (c.network.empty()) throw ConfigError("config.network is required");
  try {
    c.metric = parse_metric(get_or<std::string>(root, "metric", "config", "wlfp"));
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  if (root.contains("risk")) {
    const json& r = root["risk"];
    check_keys(r, "risk", {"wfpi", "wlfp"});
    if (r.contains("wfpi")) c.risk[0] = parse_metric_block(r["wfpi"], "risk.wfpi", base_dir);
    if (r.contains("wlfp")) c.risk[1] = parse_metric_block(r["wlfp"], "risk.wlfp", base_dir);
  }

  if (root.contains("scenarios")) {
    const json& s = root["scenarios"];
    check_keys(s, "scenarios", {"mode", "k", "fan_mode", "history_demand", "history_risk"});
    std::string mode = get_or<std::string>(s, "mode", "scenarios", "deterministic");
    if (mode == "deterministic") {
      c.scenario_mode = ScenarioMode::kDeterministic;
    } else if (mode == "stochastic") {
      c.scenario_mode = ScenarioMode::kStochastic;
    } else {
      throw ConfigError("unknown scenarios.mode '" + mode + "'");
    }
    c.scenario_options.k = get_or<int>(s, "k", "scenarios", 5);
    c.scenario_options.fan_mode =
        parse_fan_mode(get_or<std::string>(s, "fan_mode", "scenarios", "normal-partition"));
    c.history_demand = get_path(s, "history_demand", "scenarios", base_dir);
    c.history_risk = get_path(s, "history_risk", "scenarios", base_dir);
    if (c.scenario_mode == ScenarioMode::kStochastic &&
        (c.history_demand.empty() || c.history_risk.empty()))
      throw ConfigError("stochastic scenarios need history_demand and history_risk");
  }

  if (root.contains("budget")) {
    const json& b = root["budget"];
    check_keys(b, "budget", {"mode", "pi_tol", "r_tol", "k", "r_slack_max", "slack_penalty",
                             "log_form"});
    c.budget.mode = parse_budget_mode(get_or<std::string>(b, "mode", "budget", "none"));
    c.budget.pi_tol = get_or<double>(b, "pi_tol", "budget", 1.0);
    c.budget.r_tol = get_or<double>(b, "r_tol", "budget", 0.0);
    c.budget.k = get_or<int>(b, "k", "budget", 0);
    c.budget.r_slack_max = get_or<double>(b, "r_slack_max", "budget", 0.0);
    c.budget.slack_penalty = get_or<double>(b, "slack_penalty", "budget", 1.0);
    c.budget.log_form =
        parse_log_wip_form(get_or<std::string>(b, "log_form", "budget", "cumulative"));
  }
  if (root.contains("cvar")) {
    const json& v = root["cvar"];
    check_keys(v, "cvar", {"beta", "epsilon"});
    c.cvar.beta = get_or<double>(v, "beta", "cvar", 0.0);
    c.cvar.epsilon = get_or<double>(v, "epsilon", "cvar", 0.95);
    if (!(c.cvar.beta >= 0.0 && c.cvar.beta <= 1.0) ||
        !(c.cvar.epsilon >= 0.0 && c.cvar.epsilon < 1.0))
      throw ConfigError("cvar needs beta in [0,1] and epsilon in [0,1)");
  }
  c.theta_bound = get_or<double>(root, "theta_bound", "config", 0.6);
  c.spill = get_or<bool>(root, "spill", "config", false);

  if (root.contains("solver")) {
    const json& s = root["solver"];
    check_keys(s, "solver", {"relative_gap", "max_nodes", "time_limit_seconds"});
    c.solver.relative_gap = get_or<double>(s, "relative_gap", "solver", 1e-4);
    c.solver.max_nodes = get_or<long>(s, "max_nodes", "solver", 200000);
    c.solver.time_limit_seconds = get_or<double>(s, "time_limit_seconds", "solver", 0.0);
  }

  if (root.contains("real_time")) {
    const json& r = root["real_time"];
    check_keys(r, "real_time", {"realized_demand", "plan", "samples", "onset", "receding_window",
                                "pad", "spill_penalty", "threads"});
    c.rt.realized_demand = get_path(r, "realized_demand", "real_time", base_dir);
    c.rt.plan = get_path(r, "plan", "real_time", base_dir);
    c.rt.samples = get_or<int>(r, "samples", "real_time", 1000);
    try {
      c.rt.onset = parse_onset_mode(get_or<std::string>(r, "onset", "real_time", "uniform"));
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
    c.rt.receding_window = get_or<int>(r, "receding_window", "real_time", 0);
    c.rt.pad = get_or<bool>(r, "pad", "real_time", false);
    c.rt.spill_penalty = get_or<double>(r, "spill_penalty", "real_time", 1000.0);
    c.rt.threads = get_or<int>(r, "threads", "real_time", 0);
    if (c.rt.samples < 1) throw ConfigError("real_time.samples must be at least 1");
    if (c.rt.receding_window < 0) throw ConfigError("real_time.receding_window must be >= 0");
  }

  if (root.contains("sweep")) {
    const json& s = root["sweep"];
    check_keys(s, "sweep", {"pi_tol", "nzr_targets"});
    c.sweep.pi_tol = get_or<std::vector<double>>(s, "pi_tol", "sweep", {});
    c.sweep.nzr_targets = get_or<std::vector<int>>(s, "nzr_targets", "sweep", {});
    if (!c.sweep.pi_tol.empty() && !c.sweep.nzr_targets.empty())
      throw ConfigError("sweep takes either pi_tol or nzr_targets, not both");
  }

  if (root.contains("analysis")) {
    const json& a = root["analysis"];
    check_keys(a, "analysis", {"fires", "min_acres", "clusters", "years", "wip_a", "wip_b",
                               "label_a", "label_b"});
    c.analysis.fires = get_path(a, "fires", "analysis", base_dir);
    c.analysis.min_acres = get_or<double>(a, "min_acres", "analysis", 500.0);
    c.analysis.clusters = get_or<int>(a, "clusters", "analysis", 6);
    c.analysis.years = get_or<int>(a, "years", "analysis", 20);
    c.analysis.wip_a = get_path(a, "wip_a", "analysis", base_dir);
    c.analysis.wip_b = get_path(a, "wip_b", "analysis", base_dir);
    c.analysis.label_a = get_or<std::string>(a, "label_a", "analysis", "wfpi");
    c.analysis.label_b = get_or<std::string>(a, "label_b", "analysis", "wlfp");
  }

  c.seed = get_or<std::uint64_t>(root, "seed", "config", 0);
  std::string out = get_or<std::string>(root, "out", "config", "out");
  c.out = fs::path(out).is_absolute() ? fs::path(out) : base_dir / out;
  return c;
}

RunConfig load_run_config(const fs::path& path, const ConfigOverrides& overrides) {
  std::string text = read_text_file(path);
  fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return parse_run_config(text, base, overrides);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

PowerNetwork load_config_network(const RunConfig& config) {
  PowerNetwork net = load_network(config.network);
  auto diags = validate_network(net);
  if (!diags.empty()) {
    const Diagnostic& d = diags.front();
    throw ValidationError(d.entity + " " + d.field + ": " + d.rule);
  }
  return net;
}

std::vector<LineRisk> load_line_risk(const RunConfig& config, const PowerNetwork& net,
                                     bool real_time, SanitizeCounters* counters) {
  const MetricConfig& mc = config.metric_config();
  const RiskSource& src = real_time ? mc.real_time : mc.day_ahead;
  std::vector<LineRisk> lines;
  if (!src.line_risk.empty()) {
    lines = parse_line_risk_json(read_text_file(src.line_risk));
  } else {
    RiskRaster raster = load_raster(src.raster, config.metric);
    ReliabilityTable table = load_reliability_table(mc.reliability_table, config.metric);
    lines = build_line_risk(net, raster, table, mc.aggregation, counters);
  }
  if (lines.size() != net.lines.size())
    throw DimensionMismatch("line risk has " + std::to_string(lines.size()) +
                            " lines, network has " + std::to_string(net.lines.size()));
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (lines[l].line_id != net.lines[l].id)
      throw DimensionMismatch("line risk entry " + std::to_string(l) + " is line " +
                              std::to_string(lines[l].line_id) + ", expected " +
                              std::to_string(net.lines[l].id));
    if (static_cast<int>(lines[l].pi.size()) != net.horizon)
      throw DimensionMismatch("line " + std::to_string(lines[l].line_id) +
                              " risk does not span the horizon");
  }
  return lines;
}

Matrix<double> base_demand(const PowerNetwork& net) {
  Matrix<double> d(static_cast<int>(net.demands.size()), net.horizon);
  for (int i = 0; i < d.rows(); ++i)
    for (int t = 0; t < net.horizon; ++t) d(i, t) = net.demands[i].base_profile[t];
  return d;
}

Matrix<double> load_realized_demand(const RunConfig& config, const PowerNetwork& net) {
  if (config.rt.realized_demand.empty()) return base_demand(net);
  return project_demand(load_total_curve(config.rt.realized_demand, net.horizon), net);
}

double pi_tol_for_active_lines(const std::vector<LineRisk>& lines, int k, int step) {
  if (k < 0) throw ConfigError("active line target must be >= 0");
  double base = 0.0;
  std::vector<double> gains;
  for (const LineRisk& r : lines) {
    if (step < 0 || step >= static_cast<int>(r.pi.size()))
      throw DimensionMismatch("line risk does not cover the requested step");
    double pi = r.pi[step];
    if (pi <= 0.0) continue;
    base += std::log(pi);
    gains.push_back(std::log1p(-pi) - std::log(pi));
  }
  int n = static_cast<int>(gains.size());
  if (k >= n) return 1.0;
  std::sort(gains.begin(), gains.end());
  double best_k = base;  // k largest gains
  for (int i = 0; i < k; ++i) best_k += gains[n - 1 - i];
  double worst_k1 = base;  // k + 1 smallest gains
  for (int i = 0; i <= k; ++i) worst_k1 += gains[i];
  if (!(best_k < worst_k1))
    throw ConfigError("line probabilities are too spread out to cap energized lines at " +
                      std::to_string(k));
  return std::exp(0.5 * (best_k + worst_k1));
}

DayAheadInputs build_day_ahead_inputs(const RunConfig& config, const PowerNetwork& net,
                                      const std::vector<LineRisk>& day_ahead) {
  DayAheadInputs in;
  if (config.scenario_mode == ScenarioMode::kDeterministic) {
    std::vector<double> pi;
    for (const LineRisk& r : day_ahead) pi.push_back(r.pi.empty() ? 0.0 : r.pi[0]);
    in.scenarios = single_scenario(base_demand(net), std::move(pi));
    in.budget_lines = day_ahead;
    return in;
  }
  auto history = load_history(config.history_demand, config.history_risk, net);
  ReliabilityTable table =
      load_reliability_table(config.metric_config().reliability_table, config.metric);
  std::vector<int> cells;
  std::vector<double> metric;
  for (const LineRisk& r : day_ahead) {
    cells.push_back(std::max<int>(1, static_cast<int>(r.cells.size())));
    metric.push_back(r.metric_value);
  }
  in.scenarios = build_day_ahead_scenarios(net, history, table, cells, config.scenario_options);
  in.budget_lines = budget_line_risk(net, in.scenarios, metric);
  return in;
}

BuildOptions build_options(const RunConfig& config) {
  BuildOptions o;
  o.theta_bound = config.theta_bound;
  if (config.cvar.beta > 0.0) o.cvar = config.cvar;
  o.spill = config.spill;
  o.spill_penalty = config.rt.spill_penalty;
  return o;
}

DayAheadResult run_day_ahead(const RunConfig& config, const PowerNetwork& net,
                             const DayAheadInputs& inputs, const RiskBudget& budget,
                             const CommitmentPlan* start) {
  return solve_day_ahead(net, inputs.scenarios, budget, inputs.budget_lines,
                         build_options(config), config.solver.limits(), start);
}

RtOptions rt_options(const RunConfig& config) {
  RtOptions o;
  o.samples = config.rt.samples;
  o.seed = config.seed;
  o.onset = config.rt.onset;
  o.recourse.theta_bound = config.theta_bound;
  o.recourse.spill = true;
  o.recourse.spill_penalty = config.rt.spill_penalty;
  if (config.rt.receding_window > 0) {
    RecedingOptions r;
    r.window = config.rt.receding_window;
    r.pad = config.rt.pad;
    r.recourse = o.recourse;
    o.receding = r;
  }
  o.threads = config.rt.threads;
  return o;
}

std::vector<std::string> write_day_ahead_artifacts(const fs::path& dir, const PowerNetwork& net,
                                                   const DayAheadInputs& inputs,
                                                   const DayAheadResult& result) {
  write_text_file(dir / "plan.json", plan_to_json(result.plan, net));
  write_text_file(dir / "commitments.csv", commitments_csv(result.plan, net));
  write_text_file(dir / "energizations.csv", energizations_csv(result.plan, net));
  write_text_file(dir / "dispatch.csv", dispatch_csv(result.dispatch, net));
  write_text_file(dir / "costs.json", costs_to_json(result.costs));
  json s;
  s["status"] = milp::to_string(result.status);
  s["objective"] = result.objective;
  s["gap"] = result.gap;
  s["nodes"] = result.nodes;
  s["variables"] = result.num_variables;
  s["constraints"] = result.num_constraints;
  s["binaries"] = result.num_binaries;
  s["scenarios"] = inputs.scenarios.scenarios.size();
  s["nzr_active_lines"] = mean_nzr_active_lines(result.plan, inputs.budget_lines);
  s["served_mwh"] = demand_served_mwh(net, result.dispatch, inputs.scenarios);
  s["aag_mw"] = average_available_generation(net, result.plan);
  write_text_file(dir / "da_summary.json", s.dump(2) + "\n");
  return {"commitments.csv", "costs.json", "da_summary.json", "dispatch.csv",
          "energizations.csv", "plan.json"};
}

std::vector<std::string> write_rt_artifacts(const fs::path& dir, const RtReport& report) {
  write_text_file(dir / "rt_report.json", rt_report_to_json(report));
  write_text_file(dir / "rt_scenarios.csv", rt_scenarios_csv(report));
  return {"rt_report.json", "rt_scenarios.csv"};
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& config,
                    const std::vector<std::string>& artifacts) {
  std::vector<std::string> sorted = artifacts;
  std::sort(sorted.begin(), sorted.end());
  json m;
  m["tool"] = "psps";
  m["version"] = tool_version();
  m["command"] = command;
  m["seed"] = config.seed;
  m["metric"] = to_string(config.metric);
  m["config_hash"] = hex64(fnv1a64(config.canonical));
  m["artifacts"] = sorted;
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

std::vector<SweepRow> run_sweep(const RunConfig& config, const PowerNetwork& net,
                                const DayAheadInputs& inputs,
                                const std::vector<LineRisk>& real_time,
                                const Matrix<double>& realized_demand, const fs::path& out,
                                const std::function<void(const SweepRow&)>& progress) {
  std::vector<SweepRow> rows;
  const bool by_target = !config.sweep.nzr_targets.empty();
  const std::size_t n = by_target ? config.sweep.nzr_targets.size() : config.sweep.pi_tol.size();
  if (n == 0) throw ConfigError("sweep needs a pi_tol or nzr_targets list");
  if (by_target && config.budget.mode != BudgetMode::kLogWip)
    throw ConfigError("sweep.nzr_targets needs budget.mode log-wip");
  const RtOptions rt = rt_options(config);
  // Each point's plan seeds the next one.
  std::optional<CommitmentPlan> previous;
  for (std::size_t i = 0; i < n; ++i) {
    SweepRow row;
    row.point = static_cast<int>(i);
    RiskBudget budget = config.budget;
    if (by_target) {
      row.nzr_target = config.sweep.nzr_targets[i];
      budget.pi_tol = pi_tol_for_active_lines(inputs.budget_lines, row.nzr_target);
    } else {
      budget.pi_tol = config.sweep.pi_tol[i];
    }
    row.pi_tol = budget.pi_tol;
    char name[32];
    std::snprintf(name, sizeof(name), "point_%02d", row.point);
    std::vector<std::string> artifacts;
    try {
      DayAheadResult da =
          run_day_ahead(config, net, inputs, budget, previous ? &*previous : nullptr);
      previous = da.plan;
      row.nzr_active_lines = mean_nzr_active_lines(da.plan, inputs.budget_lines);
      row.da_cost = da.costs.total;
      row.served_mwh = demand_served_mwh(net, da.dispatch, inputs.scenarios);
      row.aag_mw = average_available_generation(net, da.plan);
      RtReport report = evaluate_real_time(net, da.plan, real_time, realized_demand, rt);
      row.rt_cost = report.expected_cost;
      row.rt_risk = report.expected_risk;
      row.plan_risk = report.plan_risk;
      if (!out.empty()) {
        artifacts = write_day_ahead_artifacts(out / name, net, inputs, da);
        auto more = write_rt_artifacts(out / name, report);
        artifacts.insert(artifacts.end(), more.begin(), more.end());
      }
    } catch (const SolveFailed& e) {
      row.status = e.status();
      const double nan = std::nan("");
      row.nzr_active_lines = row.da_cost = row.rt_cost = row.served_mwh = row.aag_mw = nan;
      row.rt_risk = row.plan_risk = nan;
      if (!out.empty()) {
        json err;
        err["stage"] = "psps-formulation";
        err["error"] = e.kind();
        err["status"] = e.status();
        err["message"] = e.what();
        write_text_file(out / name / "error.json", err.dump(2) + "\n");
        artifacts.push_back("error.json");
      }
    }
    if (!out.empty()) {
      json p;
      p["point"] = row.point;
      p["pi_tol"] = row.pi_tol;
      if (row.nzr_target >= 0) p["nzr_target"] = row.nzr_target;
      write_text_file(out / name / "point.json", p.dump(2) + "\n");
    }
    rows.push_back(row);
    if (progress) progress(rows.back());
  }
  if (!out.empty()) write_text_file(out / "summary.csv", sweep_summary_csv(rows));
  return rows;
}

std::string sweep_summary_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "point,pi_tol,nzr_target,status,nzr_active_lines,da_cost,rt_cost,served_mwh,aag_mw,"
        "rt_expected_risk,plan_risk\n";
  for (const SweepRow& r : rows) {
    os << r.point << ',' << format_double(r.pi_tol) << ','
       << (r.nzr_target >= 0 ? std::to_string(r.nzr_target) : std::string()) << ',' << r.status
       << ',' << format_double(r.nzr_active_lines) << ',' << format_double(r.da_cost) << ','
       << format_double(r.rt_cost) << ',' << format_double(r.served_mwh) << ','
       << format_double(r.aag_mw) << ',' << format_double(r.rt_risk) << ','
       << format_double(r.plan_risk) << '\n';
  }
  return os.str();
}

Matrix<double> parse_monthly_csv(const std::string& text, const std::string& what) {
  CsvTable t = parse_csv(text, what);
  if (t.header.size() != 13) throw ParseError(what + " must have an id column and 12 months");
  Matrix<double> m(static_cast<int>(t.rows.size()), 12);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != 13) throw ParseError(what + " row has the wrong width", t.line_numbers[r]);
    for (int c = 0; c < 12; ++c)
      m(static_cast<int>(r), c) = parse_double(t.rows[r][c + 1], what, t.line_numbers[r]);
  }
  return m;
}

}  // namespace psps
