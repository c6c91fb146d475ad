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

// psps: command-line entry point.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "psps/analytics.hpp"
#include "psps/csv.hpp"
#include "psps/error.hpp"
#include "psps/pipeline.hpp"
#include "psps/seeding.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitSolverLimit = 4;
constexpr int kExitIo = 5;

int exit_code_for(const psps::Error& e) {
  std::string kind = e.kind();
  if (kind == "ParseError" || kind == "IoError") return kExitIo;
  if (auto* sf = dynamic_cast<const psps::SolveFailed*>(&e))
    return sf->status() == "Infeasible" ? kExitInfeasible : kExitSolverLimit;
  if (kind == "ModelTooLarge" || kind == "NumericalFailure") return kExitSolverLimit;
  return kExitConfig;
}

// Tracks the stage in flight so that failures can name it.
struct Run {
  std::string command;
  std::string stage = "config";
  std::optional<psps::RunConfig> config;
  std::vector<std::string> artifacts;

  void add(const std::vector<std::string>& names) {
    artifacts.insert(artifacts.end(), names.begin(), names.end());
  }
};

void report_error(const Run& run, const std::string& kind, const std::string& message,
                  int code) {
  json err;
  err["command"] = run.command;
  err["stage"] = run.stage;
  err["error"] = kind;
  err["message"] = message;
  err["exit_code"] = code;
  std::cerr << err.dump() << "\n";
  if (run.config) {
    try {
      psps::write_text_file(run.config->out / "error.json", err.dump(2) + "\n");
    } catch (const std::exception&) {
      // The stderr line is the primary channel.
    }
  }
}

struct DayAheadOutput {
  psps::PowerNetwork net;
  psps::DayAheadInputs inputs;
  psps::DayAheadResult result;
};

DayAheadOutput solve_da(Run& run) {
  const psps::RunConfig& c = *run.config;
  DayAheadOutput o;
  run.stage = "grid-model";
  o.net = psps::load_config_network(c);
  run.stage = "risk-pipeline";
  auto da = psps::load_line_risk(c, o.net, false);
  run.stage = "scenario-engine";
  o.inputs = psps::build_day_ahead_inputs(c, o.net, da);
  run.stage = "psps-formulation";
  psps::validate_budget(c.budget, static_cast<int>(o.net.lines.size()));
  o.result = psps::run_day_ahead(c, o.net, o.inputs, c.budget);
  run.stage = "output";
  run.add(psps::write_day_ahead_artifacts(c.out, o.net, o.inputs, o.result));
  std::cerr << "day-ahead: " << psps::milp::to_string(o.result.status)
            << ", total cost " << o.result.costs.total << ", "
            << psps::mean_nzr_active_lines(o.result.plan, o.inputs.budget_lines)
            << " risky lines energized on average\n";
  return o;
}

void simulate_rt(Run& run, const psps::PowerNetwork& net, const psps::CommitmentPlan& plan) {
  const psps::RunConfig& c = *run.config;
  run.stage = "risk-pipeline";
  auto rt_lines = psps::load_line_risk(c, net, true);
  run.stage = "rt-evaluator";
  auto demand = psps::load_realized_demand(c, net);
  psps::RtReport report = psps::evaluate_real_time(net, plan, rt_lines, demand, psps::rt_options(c));
  run.stage = "output";
  run.add(psps::write_rt_artifacts(c.out, report));
  std::cerr << "real-time: expected cost " << report.expected_cost << " over " << report.samples
            << " samples (" << report.distinct_patterns << " distinct patterns)\n";
}

void cmd_solve_da(Run& run) { solve_da(run); }

void cmd_run(Run& run) {
  DayAheadOutput o = solve_da(run);
  simulate_rt(run, o.net, o.result.plan);
}

void cmd_simulate_rt(Run& run, const std::string& plan_flag) {
  const psps::RunConfig& c = *run.config;
  run.stage = "grid-model";
  psps::PowerNetwork net = psps::load_config_network(c);
  run.stage = "psps-formulation";
  fs::path plan_path = !plan_flag.empty() ? fs::path(plan_flag)
                       : !c.rt.plan.empty() ? c.rt.plan
                                            : c.out / "plan.json";
  psps::CommitmentPlan plan = psps::parse_plan(psps::read_text_file(plan_path), net);
  simulate_rt(run, net, plan);
}

void cmd_sweep(Run& run) {
  const psps::RunConfig& c = *run.config;
  run.stage = "grid-model";
  psps::PowerNetwork net = psps::load_config_network(c);
  run.stage = "risk-pipeline";
  auto da = psps::load_line_risk(c, net, false);
  auto rt = psps::load_line_risk(c, net, true);
  run.stage = "scenario-engine";
  psps::DayAheadInputs inputs = psps::build_day_ahead_inputs(c, net, da);
  run.stage = "rt-evaluator";
  auto demand = psps::load_realized_demand(c, net);
  run.stage = "sweep";
  auto rows = psps::run_sweep(c, net, inputs, rt, demand, c.out, [](const psps::SweepRow& r) {
    std::cerr << "point " << r.point << ": pi_tol " << r.pi_tol << ", " << r.status
              << ", risky lines " << r.nzr_active_lines << ", DA " << r.da_cost << ", RT "
              << r.rt_cost << "\n";
  });
  run.add({"summary.csv"});
  for (const psps::SweepRow& r : rows) {
    char name[32];
    std::snprintf(name, sizeof(name), "point_%02d/", r.point);
    run.add({std::string(name) + "point.json"});
    if (r.status == "ok") {
      for (const char* f : {"commitments.csv", "costs.json", "da_summary.json", "dispatch.csv",
                            "energizations.csv", "plan.json", "rt_report.json",
                            "rt_scenarios.csv"})
        run.add({std::string(name) + f});
    } else {
      run.add({std::string(name) + "error.json"});
    }
  }
}

void cmd_analyze_vss(Run& run) {
  const psps::RunConfig& c = *run.config;
  run.stage = "grid-model";
  psps::PowerNetwork net = psps::load_config_network(c);
  run.stage = "risk-pipeline";
  auto da = psps::load_line_risk(c, net, false);
  run.stage = "scenario-engine";
  psps::DayAheadInputs inputs = psps::build_day_ahead_inputs(c, net, da);
  run.stage = "analytics";
  psps::VssReport r = psps::compute_vss_vpi(net, inputs.scenarios, c.budget, inputs.budget_lines,
                                            c.cvar, psps::build_options(c), c.solver.limits());
  run.stage = "output";
  psps::write_text_file(c.out / "vss.json", psps::vss_to_json(r));
  run.add({"vss.json"});
}

struct ClusterOutput {
  std::vector<psps::FireRecord> fires;
  psps::ClusterResult clusters;
  psps::Matrix<double> owip;  // clusters x 12
};

ClusterOutput cluster_fires(Run& run) {
  const psps::RunConfig& c = *run.config;
  if (c.analysis.fires.empty()) throw psps::ConfigError("analysis.fires is required");
  ClusterOutput o;
  run.stage = "analytics";
  o.fires = psps::load_fire_records(c.analysis.fires, c.analysis.min_acres);
  o.clusters = psps::kmeans_regions(o.fires, c.analysis.clusters,
                                    psps::stream_seed(c.seed, psps::kStageClusters, 0));
  const int k = static_cast<int>(o.clusters.centroids.size());
  o.owip = psps::Matrix<double>(k, 12);
  for (int j = 0; j < k; ++j) {
    std::vector<psps::FireRecord> members;
    for (std::size_t i = 0; i < o.fires.size(); ++i)
      if (o.clusters.assignment[i] == j) members.push_back(o.fires[i]);
    auto h = psps::owip_histogram(members, o.clusters.hull_area_km2[j], c.analysis.years);
    for (int m = 0; m < 12; ++m) o.owip(j, m) = h[m];
  }
  return o;
}

std::string monthly_csv(const psps::Matrix<double>& m, const std::string& id) {
  std::string s = id;
  for (int i = 1; i <= 12; ++i) s += ",m" + std::to_string(i);
  s += "\n";
  for (int r = 0; r < m.rows(); ++r) {
    s += std::to_string(r);
    for (int i = 0; i < 12; ++i) s += "," + psps::format_double(m(r, i));
    s += "\n";
  }
  return s;
}

void cmd_analyze_clusters(Run& run) {
  const psps::RunConfig& c = *run.config;
  ClusterOutput o = cluster_fires(run);
  json j;
  j["records"] = o.fires.size();
  j["iterations"] = o.clusters.iterations;
  j["clusters"] = json::array();
  for (std::size_t k = 0; k < o.clusters.centroids.size(); ++k) {
    long size = 0;
    for (int a : o.clusters.assignment) size += a == static_cast<int>(k);
    j["clusters"].push_back({{"cluster", k},
                             {"latitude", o.clusters.centroids[k].latitude},
                             {"longitude", o.clusters.centroids[k].longitude},
                             {"fires", size},
                             {"hull_area_km2", o.clusters.hull_area_km2[k]}});
  }
  run.stage = "output";
  psps::write_text_file(c.out / "clusters.json", j.dump(2) + "\n");
  psps::write_text_file(c.out / "owip.csv", monthly_csv(o.owip, "cluster"));
  std::string assign = "date,latitude,longitude,acres,cluster\n";
  for (std::size_t i = 0; i < o.fires.size(); ++i) {
    const auto& f = o.fires[i];
    assign += f.date + "," + psps::format_double(f.latitude) + "," +
              psps::format_double(f.longitude) + "," + psps::format_double(f.acres) + "," +
              std::to_string(o.clusters.assignment[i]) + "\n";
  }
  psps::write_text_file(c.out / "fire_clusters.csv", assign);
  run.add({"clusters.json", "fire_clusters.csv", "owip.csv"});
}

// Rows of a bus,m1..m12 file reordered to network bus order.
psps::Matrix<double> bus_monthly(const fs::path& path, const psps::PowerNetwork& net) {
  std::string text = psps::read_text_file(path);
  psps::Matrix<double> raw = psps::parse_monthly_csv(text, path.string());
  psps::CsvTable t = psps::parse_csv(text, path.string());
  std::map<int, int> row_of;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    row_of[psps::parse_int(t.rows[r][0], path.string(), t.line_numbers[r])] = static_cast<int>(r);
  psps::Matrix<double> m(static_cast<int>(net.buses.size()), 12);
  for (std::size_t b = 0; b < net.buses.size(); ++b) {
    auto it = row_of.find(net.buses[b].id);
    if (it == row_of.end())
      throw psps::DimensionMismatch(path.string() + " has no row for bus " +
                                    std::to_string(net.buses[b].id));
    for (int i = 0; i < 12; ++i) m(static_cast<int>(b), i) = raw(it->second, i);
  }
  return m;
}

void cmd_analyze_mae(Run& run) {
  const psps::RunConfig& c = *run.config;
  if (c.analysis.wip_a.empty() || c.analysis.wip_b.empty())
    throw psps::ConfigError("analysis.wip_a and analysis.wip_b are required");
  run.stage = "grid-model";
  psps::PowerNetwork net = psps::load_config_network(c);
  ClusterOutput o = cluster_fires(run);
  // Each bus is compared with the fire region whose centroid is nearest.
  std::vector<int> assignment;
  for (const psps::Bus& b : net.buses) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < o.clusters.centroids.size(); ++k) {
      double dl = b.latitude - o.clusters.centroids[k].latitude;
      double dn = b.longitude - o.clusters.centroids[k].longitude;
      if (dl * dl + dn * dn < best_d) {
        best_d = dl * dl + dn * dn;
        best = static_cast<int>(k);
      }
    }
    assignment.push_back(best);
  }
  psps::Matrix<double> a = bus_monthly(c.analysis.wip_a, net);
  psps::Matrix<double> b = bus_monthly(c.analysis.wip_b, net);
  psps::MaeReport r = psps::compare_mae(a, b, o.owip, assignment);
  run.stage = "output";
  std::string csv = "bus,cluster,mae_" + c.analysis.label_a + ",mae_" + c.analysis.label_b +
                    ",improvement_percent\n";
  json j;
  j["label_a"] = c.analysis.label_a;
  j["label_b"] = c.analysis.label_b;
  j["buses"] = json::array();
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    csv += std::to_string(net.buses[i].id) + "," + std::to_string(assignment[i]) + "," +
           psps::format_double(r.mae_a[i]) + "," + psps::format_double(r.mae_b[i]) + "," +
           psps::format_double(r.improvement_percent[i]) + "\n";
    json row = {{"bus", net.buses[i].id}, {"cluster", assignment[i]},
                {"mae_a", r.mae_a[i]},    {"mae_b", r.mae_b[i]}};
    row["improvement_percent"] =
        std::isnan(r.improvement_percent[i]) ? json(nullptr) : json(r.improvement_percent[i]);
    j["buses"].push_back(row);
  }
  // System-wide figures: bus averages and the improvement between them.
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    mean_a += r.mae_a[i] / static_cast<double>(net.buses.size());
    mean_b += r.mae_b[i] / static_cast<double>(net.buses.size());
  }
  const double overall = psps::mae_improvement_percent(mean_a, mean_b);
  j["mean_mae_a"] = mean_a;
  j["mean_mae_b"] = mean_b;
  j["improvement_percent"] = std::isnan(overall) ? json(nullptr) : json(overall);
  psps::write_text_file(c.out / "mae.json", j.dump(2) + "\n");
  psps::write_text_file(c.out / "mae.csv", csv);
  psps::write_text_file(c.out / "owip.csv", monthly_csv(o.owip, "cluster"));
  run.add({"mae.csv", "mae.json", "owip.csv"});
}

void cmd_risk_build(Run& run) {
  const psps::RunConfig& c = *run.config;
  run.stage = "grid-model";
  psps::PowerNetwork net = psps::load_config_network(c);
  run.stage = "risk-pipeline";
  psps::SanitizeCounters da_counters, rt_counters;
  auto da = psps::load_line_risk(c, net, false, &da_counters);
  auto rt = psps::load_line_risk(c, net, true, &rt_counters);
  run.stage = "output";
  psps::write_text_file(c.out / "line_risk_da.json", psps::line_risk_to_json(da));
  psps::write_text_file(c.out / "line_risk_rt.json", psps::line_risk_to_json(rt));
  json s;
  s["metric"] = psps::to_string(c.metric);
  auto counters = [](const psps::SanitizeCounters& k) {
    return json{{"nan", k.nan}, {"clamped", k.clamped}, {"sentinel", k.sentinel}};
  };
  s["day_ahead"] = counters(da_counters);
  s["real_time"] = counters(rt_counters);
  int risky = 0;
  for (const auto& r : da) risky += r.pi[0] > 0.0;
  s["risky_lines"] = risky;
  psps::write_text_file(c.out / "risk_summary.json", s.dump(2) + "\n");
  run.add({"line_risk_da.json", "line_risk_rt.json", "risk_summary.json"});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wildfire-aware day-ahead planning and real-time evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(psps::tool_version()));

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> samples;
  std::optional<std::string> metric;
  std::string plan_flag;
  std::optional<std::string> onset;
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  app.add_option("--seed", seed, "Seed for every random stage");
  app.add_option("--out", out, "Output directory");
  app.add_option("--samples", samples, "Real-time Monte Carlo samples")->check(CLI::PositiveNumber);
  app.add_option("--metric", metric, "Risk metric")->check(CLI::IsMember({"wfpi", "wlfp"}));

  Run run;
  auto* solve = app.add_subcommand("solve-da", "Solve the day-ahead plan");
  auto* full = app.add_subcommand("run", "Solve the day-ahead plan and simulate it");
  auto* sim = app.add_subcommand("simulate-rt", "Evaluate a plan against sampled outages");
  sim->add_option("--plan", plan_flag, "Plan JSON (default: <out>/plan.json)");
  for (auto* sc : {full, sim})
    sc->add_option("--onset", onset, "Outage onset")->check(CLI::IsMember({"uniform", "whole-day"}));
  auto* sweep = app.add_subcommand("sweep", "Solve and simulate over a tolerance grid");
  auto* analyze = app.add_subcommand("analyze", "Analyses");
  analyze->require_subcommand(1);
  auto* vss = analyze->add_subcommand("vss", "Value of the stochastic solution");
  auto* mae = analyze->add_subcommand("mae", "Monthly MAE of two metrics against fire history");
  auto* clusters = analyze->add_subcommand("clusters", "Fire regions and monthly OWIP");
  auto* risk = app.add_subcommand("risk", "Risk inputs");
  risk->require_subcommand(1);
  auto* build = risk->add_subcommand("build", "Compute line risk from the configured sources");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  for (auto* sc : app.get_subcommands()) {
    run.command = sc->get_name();
    for (auto* inner : sc->get_subcommands()) run.command += " " + inner->get_name();
  }

  try {
    psps::ConfigOverrides ov;
    ov.seed = seed;
    ov.samples = samples;
    if (metric) ov.metric = psps::parse_metric(*metric);
    if (out) ov.out = fs::absolute(*out);
    if (onset) ov.onset = psps::parse_onset_mode(*onset);
    run.config = psps::load_run_config(config_path, ov);

    if (solve->parsed()) cmd_solve_da(run);
    else if (full->parsed()) cmd_run(run);
    else if (sim->parsed()) cmd_simulate_rt(run, plan_flag);
    else if (sweep->parsed()) cmd_sweep(run);
    else if (vss->parsed()) cmd_analyze_vss(run);
    else if (mae->parsed()) cmd_analyze_mae(run);
    else if (clusters->parsed()) cmd_analyze_clusters(run);
    else if (build->parsed()) cmd_risk_build(run);

    run.stage = "output";
    psps::write_manifest(run.config->out, run.command, *run.config, run.artifacts);
  } catch (const psps::Error& e) {
    int code = exit_code_for(e);
    report_error(run, e.kind(), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    report_error(run, "InternalError", e.what(), kExitInternal);
    return kExitInternal;
  }
  return kExitOk;
}
