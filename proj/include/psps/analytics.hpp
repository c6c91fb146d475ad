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

#ifndef PSPS_ANALYTICS_HPP_
#define PSPS_ANALYTICS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psps/formulation.hpp"
#include "psps/grid_model.hpp"
#include "psps/scenario_engine.hpp"

namespace psps {

// Conditional value at risk of a discrete cost distribution at confidence
// `epsilon` in [0,1): the probability-weighted mean of the worst
// (1 - epsilon) tail. Computed from the costs sorted in descending order.
// Throws ValidationError on bad probabilities or epsilon.
double cvar(std::span<const double> costs, std::span<const double> probs, double epsilon);

// The same quantity from the linear program
//   min nu + 1/(1-epsilon) sum p_i g_i  s.t.  g_i >= c_i - nu, g_i >= 0
// solved with the embedded LP engine.
double cvar_lp(std::span<const double> costs, std::span<const double> probs, double epsilon);

struct MeanRiskValue {
  double mean = 0.0;
  double cvar = 0.0;
  double combined = 0.0;  // (1 - beta) mean + beta cvar
  double beta = 0.0;
  double epsilon = 0.0;
};

MeanRiskValue mean_risk(std::span<const double> costs, std::span<const double> probs,
                        double beta, double epsilon);

struct VssReport {
  double ev = 0.0;
  double mrws = 0.0;
  double mrrp = 0.0;
  double mrev = 0.0;
  double mrvpi = 0.0;  // mrrp - mrws
  double mrvss = 0.0;  // mrev - mrrp
  bool complete = true;  // false when a component was infeasible
  std::string note;
  CommitmentPlan ev_plan;
  CommitmentPlan rp_plan;

  // MRWS <= MRRP <= MREV within `tol`; vacuous when incomplete.
  bool ordered(double tol = 1e-6) const;
};

// EV: deterministic solve on the expected scenario. MRWS: mean-risk value of
// the per-scenario clairvoyant optima. MRRP: the mean-risk stochastic solve.
// MREV: mean-risk value of per-scenario recourse with the EV plan fixed. All
// four share the first-stage feasible set defined by `budget_lines`.
VssReport compute_vss_vpi(const PowerNetwork& net, const ScenarioSet& scenarios,
                          const RiskBudget& budget, const std::vector<LineRisk>& budget_lines,
                          const CvarConfig& cvar_config, const BuildOptions& options = {},
                          const milp::SolveLimits& limits = {});

struct MaeReport {
  std::vector<double> mae_a;  // per bus
  std::vector<double> mae_b;
  // 100 (mae_a - mae_b) / mae_a per bus; NaN where mae_a is 0.
  std::vector<double> improvement_percent;
};

// MAE of each bus's monthly series against the monthly series of its
// cluster. `wip` rows are buses, `owip` rows are clusters; both have 12
// columns. Throws DimensionMismatch.
std::vector<double> mae_by_bus(const Matrix<double>& wip, const Matrix<double>& owip,
                               const std::vector<int>& assignment);

// Percent by which `mae_b` improves on `mae_a`.
double mae_improvement_percent(double mae_a, double mae_b);

MaeReport compare_mae(const Matrix<double>& wip_a, const Matrix<double>& wip_b,
                      const Matrix<double>& owip, const std::vector<int>& assignment);

struct FireRecord {
  std::string date;  // YYYY-MM-DD
  double latitude = 0.0;
  double longitude = 0.0;
  double acres = 0.0;
};

// CSV with columns date,latitude,longitude,acres. Records below
// `min_acres` are dropped.
std::vector<FireRecord> parse_fire_records(const std::string& csv, double min_acres = 500.0);
std::vector<FireRecord> load_fire_records(const std::filesystem::path& path,
                                          double min_acres = 500.0);

struct ClusterResult {
  std::vector<int> assignment;
  std::vector<GeoPoint> centroids;
  std::vector<double> hull_area_km2;
  int iterations = 0;
};

// Lloyd's algorithm on (lat, lon) with k-means++ seeding from `seed`. An
// empty cluster triggers one re-seed, then DegenerateCluster. Hull areas
// use an equirectangular projection at each cluster's mean latitude.
ClusterResult kmeans_regions(const std::vector<FireRecord>& records, int k, std::uint64_t seed);

// Planar convex hull area (shoelace on the monotone-chain hull).
double convex_hull_area(std::vector<std::array<double, 2>> points);
double hull_area_km2(const std::vector<GeoPoint>& points);

// Monthly observed ignition probability: fires starting in month m divided
// by area * days_in_month(m) * years. February uses 28 days. Throws
// ZeroArea for a non-positive area and ValidationError for years < 1.
std::array<double, 12> owip_histogram(const std::vector<FireRecord>& records, double area_km2,
                                      int years);

std::string vss_to_json(const VssReport& report);

}  // namespace psps

#endif  // PSPS_ANALYTICS_HPP_
