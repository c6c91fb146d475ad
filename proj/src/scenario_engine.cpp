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

#include "psps/scenario_engine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "json.hpp"
#include "psps/csv.hpp"
#include "psps/error.hpp"

namespace psps {
namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Mean and sample standard deviation; std is 0 for fewer than two values.
std::pair<double, double> mean_std(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

// Rows are days; columns are z-scored features. Constant features become 0.
std::vector<std::vector<double>> reduction_features(const std::vector<HistoryDay>& history) {
  const std::size_t n = history.size();
  const std::size_t steps = history.front().total_demand.size();
  std::vector<std::vector<double>> f(n, std::vector<double>(steps + 1, 0.0));
  std::vector<double> column(n);
  for (std::size_t j = 0; j <= steps; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = j < steps ? history[i].total_demand[j] : history[i].cumulative_bus_risk;
    }
    const auto [mean, sd] = mean_std(column);
    if (sd == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) f[i][j] = (column[i] - mean) / sd;
  }
  return f;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<std::vector<double>> json_matrix(const Matrix<double>& m) {
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

}  // namespace

void validate_scenario_set(const ScenarioSet& set, const PowerNetwork& net) {
  if (set.scenarios.empty()) throw ValidationError("scenario set: no scenarios");
  double total = 0.0;
  for (const Scenario& s : set.scenarios) {
    const std::string e = "scenario " + std::to_string(s.id);
    if (!(s.probability > 0.0)) throw ValidationError(e + ": probability must be positive");
    total += s.probability;
    if (s.demand.rows() != net.num_demands() || s.demand.cols() != net.horizon) {
      throw ValidationError(e + ": demand must be demands x horizon");
    }
    for (double v : s.demand.data()) {
      if (!(v >= 0.0)) throw ValidationError(e + ": negative demand");
    }
    if (static_cast<int>(s.line_pi.size()) != net.num_lines()) {
      throw ValidationError(e + ": one line risk per line required");
    }
    for (double p : s.line_pi) {
      if (!(p >= 0.0 && p < 1.0)) throw ValidationError(e + ": line risk outside [0,1)");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("scenario set: probabilities sum to " + format_double(total));
  }
}

std::vector<LineRisk> scenario_line_risk(const Scenario& s, const PowerNetwork& net) {
  std::vector<LineRisk> out;
  out.reserve(net.lines.size());
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    out.push_back(make_line_risk(net.lines[l].id, s.line_pi[l], net.horizon));
  }
  return out;
}

ReducedScenarios reduce_scenarios(const std::vector<HistoryDay>& history, int k) {
  const int n = static_cast<int>(history.size());
  if (k < 1 || n < k) {
    throw InsufficientHistory("reduce_scenarios: need at least " + std::to_string(k) +
                              " days, have " + std::to_string(n));
  }
  const auto features = reduction_features(history);
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) d[i][j] = d[j][i] = distance(features[i], features[j]);
  }
  std::vector<double> prob(n, 1.0 / n);
  std::vector<bool> alive(n, true);
  for (int remaining = n; remaining > k; --remaining) {
    int victim = -1;
    int heir = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      int nearest = -1;
      for (int j = 0; j < n; ++j) {
        if (j == i || !alive[j]) continue;
        if (nearest < 0 || d[i][j] < d[i][nearest]) nearest = j;
      }
      const double cost = prob[i] * d[i][nearest];
      if (cost < best) {
        best = cost;
        victim = i;
        heir = nearest;
      }
    }
    alive[victim] = false;
    prob[heir] += prob[victim];
    prob[victim] = 0.0;
  }
  ReducedScenarios out;
  for (int i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    out.days.push_back(i);
    out.probabilities.push_back(prob[i]);
  }
  return out;
}

FanProbabilityMode parse_fan_mode(std::string_view s) {
  if (s == "normal-partition") return FanProbabilityMode::kNormalPartition;
  if (s == "tree") return FanProbabilityMode::kTree;
  throw ConfigError("unknown fan_probability_mode '" + std::string(s) +
                    "' (expected normal-partition or tree)");
}

const char* to_string(FanProbabilityMode m) {
  return m == FanProbabilityMode::kTree ? "tree" : "normal-partition";
}

std::array<double, 5> normal_partition() {
  const double a = normal_cdf(-1.5);
  const double b = normal_cdf(-0.5) - a;
  return {a, b, 1.0 - 2.0 * (a + b), b, a};
}

std::vector<FanCurve> gaussian_fan(const std::vector<HistoryDay>& history) {
  if (history.size() < 2) {
    throw InsufficientHistory("gaussian_fan: need at least 2 days, have " +
                              std::to_string(history.size()));
  }
  const std::size_t steps = history.front().total_demand.size();
  std::vector<double> mu(steps), sigma(steps), column(history.size());
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < history.size(); ++i) {
      if (history[i].total_demand.size() != steps) {
        throw DimensionMismatch("gaussian_fan: days have different lengths");
      }
      column[i] = history[i].total_demand[t];
    }
    std::tie(mu[t], sigma[t]) = mean_std(column);
  }
  const auto probs = normal_partition();
  std::vector<FanCurve> out;
  for (int k = -2; k <= 2; ++k) {
    FanCurve c;
    c.offset = k;
    c.probability = probs[k + 2];
    c.total_demand.resize(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      c.total_demand[t] = std::max(0.0, mu[t] + k * sigma[t]);
    }
    out.push_back(std::move(c));
  }
  return out;
}

const HistoryDay& match_risk_day(double target, const std::vector<HistoryDay>& history) {
  if (history.empty()) throw InsufficientHistory("match_risk_day: empty history");
  const HistoryDay* best = &history.front();
  for (const HistoryDay& day : history) {
    const double gap = std::abs(day.cumulative_bus_risk - target);
    const double best_gap = std::abs(best->cumulative_bus_risk - target);
    if (gap < best_gap || (gap == best_gap && day.date < best->date)) best = &day;
  }
  return *best;
}

Matrix<double> project_demand(const std::vector<double>& total_curve, const PowerNetwork& net) {
  if (static_cast<int>(total_curve.size()) != net.horizon) {
    throw DimensionMismatch("project_demand: curve has " + std::to_string(total_curve.size()) +
                            " steps, horizon is " + std::to_string(net.horizon));
  }
  if (std::all_of(total_curve.begin(), total_curve.end(), [](double v) { return v == 0.0; })) {
    throw ZeroTotal("project_demand: total demand curve is all zero");
  }
  std::vector<double> peak(net.demands.size(), 0.0);
  for (std::size_t d = 0; d < net.demands.size(); ++d) {
    const auto& p = net.demands[d].base_profile;
    if (!p.empty()) peak[d] = *std::max_element(p.begin(), p.end());
  }
  const double peak_sum = std::accumulate(peak.begin(), peak.end(), 0.0);
  if (!(peak_sum > 0.0)) throw ZeroTotal("project_demand: every base profile is zero");
  Matrix<double> out(net.num_demands(), net.horizon);
  for (int d = 0; d < net.num_demands(); ++d) {
    for (int t = 0; t < net.horizon; ++t) out(d, t) = total_curve[t] * (peak[d] / peak_sum);
  }
  return out;
}

Scenario expected_scenario(const ScenarioSet& set) {
  if (set.scenarios.empty()) throw ValidationError("expected_scenario: empty set");
  const Scenario& first = set.scenarios.front();
  Scenario out;
  out.id = 0;
  out.probability = 1.0;
  out.demand = Matrix<double>(first.demand.rows(), first.demand.cols());
  out.line_pi.assign(first.line_pi.size(), 0.0);
  for (const Scenario& s : set.scenarios) {
    if (s.demand.rows() != out.demand.rows() || s.demand.cols() != out.demand.cols() ||
        s.line_pi.size() != out.line_pi.size()) {
      throw DimensionMismatch("expected_scenario: scenarios differ in shape");
    }
    for (int r = 0; r < s.demand.rows(); ++r) {
      for (int c = 0; c < s.demand.cols(); ++c) out.demand(r, c) += s.probability * s.demand(r, c);
    }
    for (std::size_t l = 0; l < s.line_pi.size(); ++l) out.line_pi[l] += s.probability * s.line_pi[l];
  }
  return out;
}

double line_pi_from_metric(double m, int cells, const ReliabilityTable& table) {
  const double w = metric_to_wip(sanitize_metric(m, table.metric), table);
  if (w >= 1.0) return 1.0;
  return -std::expm1(cells * std::log1p(-w));
}

ScenarioSet build_day_ahead_scenarios(const PowerNetwork& net,
                                      const std::vector<HistoryDay>& history,
                                      const ReliabilityTable& table,
                                      const std::vector<int>& cells_per_line,
                                      const ScenarioOptions& options) {
  if (!cells_per_line.empty() && static_cast<int>(cells_per_line.size()) != net.num_lines()) {
    throw DimensionMismatch("cells_per_line must have one entry per line");
  }
  std::vector<FanCurve> fan = gaussian_fan(history);
  if (options.fan_mode == FanProbabilityMode::kTree) {
    if (options.k != 5) throw ConfigError("tree fan probabilities need k = 5");
    const ReducedScenarios reduced = reduce_scenarios(history, options.k);
    std::vector<int> order(reduced.days.size());
    std::iota(order.begin(), order.end(), 0);
    auto total = [&](int i) {
      const auto& c = history[reduced.days[i]].total_demand;
      return std::accumulate(c.begin(), c.end(), 0.0);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return total(a) < total(b); });
    for (std::size_t k = 0; k < fan.size(); ++k) fan[k].probability = reduced.probabilities[order[k]];
  }

  std::vector<double> risk(history.size());
  for (std::size_t i = 0; i < history.size(); ++i) risk[i] = history[i].cumulative_bus_risk;
  const auto [risk_mean, risk_sd] = mean_std(risk);

  ScenarioSet set;
  set.kind = ScenarioKind::kDayAhead;
  for (std::size_t k = 0; k < fan.size(); ++k) {
    Scenario s;
    s.id = static_cast<int>(k) + 1;
    s.probability = fan[k].probability;
    s.demand = project_demand(fan[k].total_demand, net);
    const HistoryDay& day = match_risk_day(risk_mean + fan[k].offset * risk_sd, history);
    if (static_cast<int>(day.line_metric.size()) != net.num_lines()) {
      throw DimensionMismatch("history day " + day.date + ": one metric per line required");
    }
    for (int l = 0; l < net.num_lines(); ++l) {
      const int cells = cells_per_line.empty() ? 1 : cells_per_line[l];
      s.line_pi.push_back(line_pi_from_metric(day.line_metric[l], cells, table));
    }
    set.scenarios.push_back(std::move(s));
  }
  // The normal partition is symmetric and sums to 1 only up to rounding.
  double total = 0.0;
  for (const Scenario& s : set.scenarios) total += s.probability;
  for (Scenario& s : set.scenarios) s.probability /= total;
  validate_scenario_set(set, net);
  return set;
}

ScenarioSet single_scenario(const Matrix<double>& demand, std::vector<double> line_pi,
                            ScenarioKind kind) {
  ScenarioSet set;
  set.kind = kind;
  Scenario s;
  s.id = 1;
  s.probability = 1.0;
  s.demand = demand;
  s.line_pi = std::move(line_pi);
  set.scenarios.push_back(std::move(s));
  return set;
}

std::vector<HistoryDay> parse_history(const std::string& demand_csv, const std::string& risk_csv,
                                      const PowerNetwork& net) {
  const CsvTable dt = parse_csv(demand_csv, "demand history");
  const int c_date = dt.column("date");
  const int c_step = dt.column("step");
  const int c_total = dt.column("total_demand");
  std::map<std::string, HistoryDay> days;
  for (std::size_t r = 0; r < dt.rows.size(); ++r) {
    const std::string& date = dt.text(r, c_date);
    const int step = dt.integer(r, c_step);
    if (step < 1 || step > net.horizon) {
      throw ParseError("demand history: step " + std::to_string(step) + " outside 1.." +
                           std::to_string(net.horizon),
                       dt.line_numbers[r]);
    }
    HistoryDay& day = days[date];
    day.date = date;
    if (day.total_demand.empty()) {
      day.total_demand.assign(net.horizon, std::numeric_limits<double>::quiet_NaN());
    }
    day.total_demand[step - 1] = dt.number(r, c_total);
  }
  for (const auto& [date, day] : days) {
    for (double v : day.total_demand) {
      if (std::isnan(v)) throw ParseError("demand history: day " + date + " is missing steps");
    }
  }

  const CsvTable rt = parse_csv(risk_csv, "risk history");
  const int r_date = rt.column("date");
  const int r_cum = rt.column("cumulative_bus_risk");
  std::vector<int> line_cols;
  for (const Line& line : net.lines) line_cols.push_back(rt.column("line_" + std::to_string(line.id)));
  std::map<std::string, bool> seen;
  for (std::size_t r = 0; r < rt.rows.size(); ++r) {
    const std::string& date = rt.text(r, r_date);
    auto it = days.find(date);
    if (it == days.end()) {
      throw ParseError("risk history: date " + date + " has no demand history", rt.line_numbers[r]);
    }
    if (seen[date]) throw ParseError("risk history: duplicate date " + date, rt.line_numbers[r]);
    seen[date] = true;
    it->second.cumulative_bus_risk = rt.number(r, r_cum);
    it->second.line_metric.clear();
    for (int c : line_cols) it->second.line_metric.push_back(rt.number(r, c));
  }
  std::vector<HistoryDay> out;
  for (auto& [date, day] : days) {
    if (!seen.count(date)) throw ParseError("risk history: date " + date + " missing");
    out.push_back(std::move(day));
  }
  return out;
}

std::vector<HistoryDay> load_history(const std::filesystem::path& demand_csv,
                                     const std::filesystem::path& risk_csv,
                                     const PowerNetwork& net) {
  return parse_history(read_text_file(demand_csv), read_text_file(risk_csv), net);
}

std::vector<double> parse_total_curve(const std::string& csv, int horizon) {
  const CsvTable t = parse_csv(csv, "demand curve");
  const int c_step = t.column("step");
  const int c_total = t.column("total_demand");
  std::vector<double> out(horizon, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const int step = t.integer(r, c_step);
    if (step < 1 || step > horizon) {
      throw ParseError("demand curve: step " + std::to_string(step) + " outside 1.." +
                           std::to_string(horizon),
                       t.line_numbers[r]);
    }
    out[step - 1] = t.number(r, c_total);
  }
  for (double v : out) {
    if (std::isnan(v)) throw ParseError("demand curve: missing steps");
  }
  return out;
}

std::vector<double> load_total_curve(const std::filesystem::path& path, int horizon) {
  return parse_total_curve(read_text_file(path), horizon);
}

std::string scenario_set_to_json(const ScenarioSet& set) {
  nlohmann::json root;
  root["kind"] = set.kind == ScenarioKind::kDayAhead ? "day-ahead" : "real-time";
  root["scenarios"] = nlohmann::json::array();
  for (const Scenario& s : set.scenarios) {
    root["scenarios"].push_back({{"id", s.id},
                                 {"probability", s.probability},
                                 {"demand", json_matrix(s.demand)},
                                 {"line_pi", s.line_pi}});
  }
  return root.dump(2) + "\n";
}

ScenarioSet parse_scenario_set(const std::string& text) {
  ScenarioSet set;
  try {
    const nlohmann::json root = nlohmann::json::parse(text);
    const std::string kind = root.at("kind").get<std::string>();
    if (kind == "day-ahead") {
      set.kind = ScenarioKind::kDayAhead;
    } else if (kind == "real-time") {
      set.kind = ScenarioKind::kRealTime;
    } else {
      throw ParseError("scenario set: unknown kind '" + kind + "'");
    }
    for (const auto& js : root.at("scenarios")) {
      Scenario s;
      s.id = js.at("id").get<int>();
      s.probability = js.at("probability").get<double>();
      const auto rows = js.at("demand").get<std::vector<std::vector<double>>>();
      const int cols = rows.empty() ? 0 : static_cast<int>(rows.front().size());
      s.demand = Matrix<double>(static_cast<int>(rows.size()), cols);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<int>(rows[r].size()) != cols) {
          throw ParseError("scenario " + std::to_string(s.id) + ": ragged demand matrix");
        }
        for (int c = 0; c < cols; ++c) s.demand(static_cast<int>(r), c) = rows[r][c];
      }
      s.line_pi = js.at("line_pi").get<std::vector<double>>();
      set.scenarios.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario set: ") + e.what());
  }
  return set;
}

}  // namespace psps
