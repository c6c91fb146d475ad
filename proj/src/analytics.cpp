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

#include "psps/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "json.hpp"
#include "psps/csv.hpp"
#include "psps/error.hpp"
#include "psps/milp/solver.hpp"

namespace psps {
namespace {

void check_distribution(std::span<const double> costs, std::span<const double> probs,
                        double epsilon) {
  if (costs.size() != probs.size() || costs.empty()) {
    throw ValidationError("cvar: costs and probabilities must be non-empty and equal length");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw ValidationError("cvar: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ValidationError("cvar: probabilities must sum to 1");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ValidationError("cvar: epsilon must be in [0,1)");
}

constexpr double kKmPerDegree = 111.32;
constexpr int kDaysInMonth[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

double sq_dist(const GeoPoint& a, const GeoPoint& b) {
  const double dy = a.latitude - b.latitude;
  const double dx = a.longitude - b.longitude;
  return dx * dx + dy * dy;
}

std::vector<GeoPoint> kmeans_pp(const std::vector<GeoPoint>& pts, int k, std::mt19937_64& rng) {
  std::vector<GeoPoint> centers;
  std::uniform_int_distribution<std::size_t> first(0, pts.size() - 1);
  centers.push_back(pts[first(rng)]);
  std::vector<double> d2(pts.size());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const GeoPoint& c : centers) best = std::min(best, sq_dist(pts[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (pick = 0; pick + 1 < pts.size(); ++pick) {
        r -= d2[pick];
        if (r < 0.0 && d2[pick] > 0.0) break;
      }
      // Never pick a point that coincides with a center.
      while (d2[pick] == 0.0) pick = (pick + 1) % pts.size();
    } else {
      pick = first(rng);
    }
    centers.push_back(pts[pick]);
  }
  return centers;
}

// Returns false when a cluster ends up empty.
bool lloyd(const std::vector<GeoPoint>& pts, std::vector<GeoPoint>& centers,
           std::vector<int>& assignment, int& iterations) {
  const int k = static_cast<int>(centers.size());
  assignment.assign(pts.size(), -1);
  for (iterations = 1; iterations <= 300; ++iterations) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      int best = 0;
      double best_d = sq_dist(pts[i], centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(pts[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
    }
    std::vector<double> lat(k, 0.0), lon(k, 0.0);
    std::vector<int> count(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      lat[assignment[i]] += pts[i].latitude;
      lon[assignment[i]] += pts[i].longitude;
      ++count[assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] == 0) return false;
      centers[c] = GeoPoint{lat[c] / count[c], lon[c] / count[c]};
    }
    if (!changed) break;
  }
  return true;
}

}  // namespace

double cvar(std::span<const double> costs, std::span<const double> probs, double epsilon) {
  check_distribution(costs, probs, epsilon);
  std::vector<std::size_t> order(costs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return costs[a] > costs[b]; });
  const double tail = 1.0 - epsilon;
  double taken = 0.0;
  double sum = 0.0;
  for (std::size_t i : order) {
    const double w = std::min(probs[i], tail - taken);
    if (w <= 0.0) break;
    sum += w * costs[i];
    taken += w;
  }
  return sum / taken;
}

double cvar_lp(std::span<const double> costs, std::span<const double> probs, double epsilon) {
  check_distribution(costs, probs, epsilon);
  milp::MilpModel m;
  const milp::VarId nu = m.add_variable("nu", -milp::kInf, milp::kInf);
  m.set_objective(nu, 1.0);
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const milp::VarId g = m.add_variable("g" + std::to_string(i), 0.0, milp::kInf);
    m.set_objective(g, probs[i] / (1.0 - epsilon));
    m.add_constraint("tail" + std::to_string(i), {{g, 1.0}, {nu, 1.0}},
                     milp::Sense::kGreaterEqual, costs[i]);
  }
  const milp::MilpSolution s = milp::solve_lp(m);
  if (s.status != milp::SolveStatus::kOptimal) {
    throw NumericalFailure("cvar_lp: LP ended " + std::string(milp::to_string(s.status)));
  }
  return s.objective;
}

MeanRiskValue mean_risk(std::span<const double> costs, std::span<const double> probs, double beta,
                        double epsilon) {
  MeanRiskValue v;
  v.beta = beta;
  v.epsilon = epsilon;
  for (std::size_t i = 0; i < costs.size(); ++i) v.mean += probs[i] * costs[i];
  v.cvar = cvar(costs, probs, epsilon);
  v.combined = (1.0 - beta) * v.mean + beta * v.cvar;
  return v;
}

bool VssReport::ordered(double tol) const {
  if (!complete) return true;
  return mrws <= mrrp + tol && mrrp <= mrev + tol;
}

VssReport compute_vss_vpi(const PowerNetwork& net, const ScenarioSet& scenarios,
                          const RiskBudget& budget, const std::vector<LineRisk>& budget_lines,
                          const CvarConfig& cvar_config, const BuildOptions& options,
                          const milp::SolveLimits& limits) {
  if (scenarios.size() < 2) throw ConfigError("compute_vss_vpi needs at least two scenarios");
  VssReport r;
  std::vector<double> probs;
  for (const Scenario& s : scenarios.scenarios) probs.push_back(s.probability);
  auto mark = [&](const std::string& what, const SolveFailed& e) {
    r.complete = false;
    if (!r.note.empty()) r.note += "; ";
    r.note += what + ": " + e.what();
  };

  BuildOptions single = options;
  single.cvar.reset();
  single.fixed_plan = nullptr;

  // EV.
  const ScenarioSet ev_set = single_scenario(expected_scenario(scenarios).demand,
                                             expected_scenario(scenarios).line_pi);
  bool have_ev = false;
  try {
    const DayAheadResult ev = solve_day_ahead(net, ev_set, budget, budget_lines, single, limits);
    r.ev = ev.objective;
    r.ev_plan = ev.plan;
    have_ev = true;
  } catch (const SolveFailed& e) {
    mark("EV", e);
  }

  // Wait-and-see.
  std::vector<double> ws;
  try {
    for (const Scenario& s : scenarios.scenarios) {
      const ScenarioSet one = single_scenario(s.demand, s.line_pi);
      ws.push_back(solve_day_ahead(net, one, budget, budget_lines, single, limits).objective);
    }
    r.mrws = mean_risk(ws, probs, cvar_config.beta, cvar_config.epsilon).combined;
  } catch (const SolveFailed& e) {
    mark("WS", e);
  }

  // Recourse problem.
  BuildOptions stochastic = options;
  stochastic.fixed_plan = nullptr;
  stochastic.cvar = cvar_config;
  try {
    const DayAheadResult rp =
        solve_day_ahead(net, scenarios, budget, budget_lines, stochastic, limits);
    r.mrrp = rp.objective;
    r.rp_plan = rp.plan;
  } catch (const SolveFailed& e) {
    mark("RP", e);
  }

  // Expected result of the EV plan.
  if (have_ev) {
    BuildOptions fixed = stochastic;
    fixed.fixed_plan = &r.ev_plan;
    try {
      const DayAheadResult eev =
          solve_day_ahead(net, scenarios, budget, budget_lines, fixed, limits);
      r.mrev = eev.objective + budget_slack_cost(r.ev_plan, budget, budget_lines);
    } catch (const SolveFailed& e) {
      mark("EEV", e);
    }
  } else {
    r.complete = false;
  }
  r.mrvpi = r.mrrp - r.mrws;
  r.mrvss = r.mrev - r.mrrp;
  return r;
}

std::vector<double> mae_by_bus(const Matrix<double>& wip, const Matrix<double>& owip,
                               const std::vector<int>& assignment) {
  if (wip.cols() != 12 || owip.cols() != 12) {
    throw DimensionMismatch("mae: series must have 12 monthly values");
  }
  if (static_cast<int>(assignment.size()) != wip.rows()) {
    throw DimensionMismatch("mae: one cluster assignment per bus required");
  }
  std::vector<double> out(wip.rows());
  for (int b = 0; b < wip.rows(); ++b) {
    const int k = assignment[b];
    if (k < 0 || k >= owip.rows()) {
      throw DimensionMismatch("mae: bus " + std::to_string(b + 1) + " assigned to unknown cluster");
    }
    double s = 0.0;
    for (int m = 0; m < 12; ++m) s += std::abs(wip(b, m) - owip(k, m));
    out[b] = s / 12.0;
  }
  return out;
}

double mae_improvement_percent(double mae_a, double mae_b) {
  if (mae_a == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * (mae_a - mae_b) / mae_a;
}

MaeReport compare_mae(const Matrix<double>& wip_a, const Matrix<double>& wip_b,
                      const Matrix<double>& owip, const std::vector<int>& assignment) {
  MaeReport r;
  r.mae_a = mae_by_bus(wip_a, owip, assignment);
  r.mae_b = mae_by_bus(wip_b, owip, assignment);
  for (std::size_t b = 0; b < r.mae_a.size(); ++b) {
    r.improvement_percent.push_back(mae_improvement_percent(r.mae_a[b], r.mae_b[b]));
  }
  return r;
}

std::vector<FireRecord> parse_fire_records(const std::string& text, double min_acres) {
  const CsvTable t = parse_csv(text, "fire records");
  const int c_date = t.column("date");
  const int c_lat = t.column("latitude");
  const int c_lon = t.column("longitude");
  const int c_acres = t.column("acres");
  std::vector<FireRecord> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    FireRecord f{t.text(r, c_date), t.number(r, c_lat), t.number(r, c_lon),
                 t.number(r, c_acres)};
    if (f.date.size() < 7 || f.date[4] != '-') {
      throw ParseError("fire records: date must be YYYY-MM-DD", t.line_numbers[r]);
    }
    const int month = parse_int(f.date.substr(5, 2), "fire records month", t.line_numbers[r]);
    if (month < 1 || month > 12) throw ParseError("fire records: bad month", t.line_numbers[r]);
    if (f.acres >= min_acres) out.push_back(std::move(f));
  }
  return out;
}

std::vector<FireRecord> load_fire_records(const std::filesystem::path& path, double min_acres) {
  return parse_fire_records(read_text_file(path), min_acres);
}

ClusterResult kmeans_regions(const std::vector<FireRecord>& records, int k, std::uint64_t seed) {
  if (k < 1 || static_cast<int>(records.size()) < k) {
    throw ValidationError("kmeans: need at least k = " + std::to_string(k) + " records");
  }
  std::vector<GeoPoint> pts;
  for (const FireRecord& f : records) pts.push_back({f.latitude, f.longitude});
  std::mt19937_64 rng(seed);
  ClusterResult r;
  bool ok = false;
  for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
    r.centroids = kmeans_pp(pts, k, rng);
    ok = lloyd(pts, r.centroids, r.assignment, r.iterations);
  }
  if (!ok) throw DegenerateCluster("kmeans: a cluster stayed empty after re-seeding");
  for (int c = 0; c < k; ++c) {
    std::vector<GeoPoint> members;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (r.assignment[i] == c) members.push_back(pts[i]);
    }
    r.hull_area_km2.push_back(hull_area_km2(members));
  }
  return r;
}

double convex_hull_area(std::vector<std::array<double, 2>> p) {
  if (p.size() < 3) return 0.0;
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return 0.0;
  auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a,
                  const std::array<double, 2>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<std::array<double, 2>> hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  double area = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area += a[0] * b[1] - b[0] * a[1];
  }
  return std::abs(area) / 2.0;
}

double hull_area_km2(const std::vector<GeoPoint>& points) {
  if (points.empty()) return 0.0;
  double mean_lat = 0.0;
  for (const GeoPoint& p : points) mean_lat += p.latitude;
  mean_lat /= points.size();
  const double kx = kKmPerDegree * std::cos(mean_lat * std::acos(-1.0) / 180.0);
  std::vector<std::array<double, 2>> xy;
  for (const GeoPoint& p : points) xy.push_back({p.longitude * kx, p.latitude * kKmPerDegree});
  return convex_hull_area(std::move(xy));
}

std::array<double, 12> owip_histogram(const std::vector<FireRecord>& records, double area_km2,
                                      int years) {
  if (!(area_km2 > 0.0)) throw ZeroArea("owip_histogram: hull area must be positive");
  if (years < 1) throw ValidationError("owip_histogram: years must be >= 1");
  std::array<double, 12> counts{};
  for (const FireRecord& f : records) {
    const int month = parse_int(f.date.substr(5, 2), "fire record month");
    counts.at(month - 1) += 1.0;
  }
  std::array<double, 12> out{};
  for (int m = 0; m < 12; ++m) out[m] = counts[m] / (area_km2 * kDaysInMonth[m] * years);
  return out;
}

std::string vss_to_json(const VssReport& r) {
  nlohmann::json j;
  j["ev"] = r.ev;
  j["mrws"] = r.mrws;
  j["mrrp"] = r.mrrp;
  j["mrev"] = r.mrev;
  j["mrvpi"] = r.mrvpi;
  j["mrvss"] = r.mrvss;
  j["complete"] = r.complete;
  j["ordered"] = r.ordered();
  if (!r.note.empty()) j["note"] = r.note;
  return j.dump(2) + "\n";
}

}  // namespace psps
