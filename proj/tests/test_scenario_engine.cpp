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

#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "psps/error.hpp"
#include "psps/scenario_engine.hpp"
#include "support/fixtures.hpp"

using namespace psps;

namespace {

HistoryDay day(std::string date, std::vector<double> curve, double risk,
               std::vector<double> lines = {}) {
  return HistoryDay{std::move(date), std::move(curve), risk, std::move(lines)};
}

std::string date_of(int i) {
  const std::string d = std::to_string(i + 1);
  return "2020-07-" + std::string(d.size() < 2 ? "0" : "") + d;
}

double sum(const std::vector<double>& xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); }

}  // namespace

TEST_CASE("reduce_scenarios collapses duplicates") {
  const std::vector<HistoryDay> h = {day("a", {10, 20}, 5), day("b", {10, 20}, 5)};
  const auto r = reduce_scenarios(h, 1);
  REQUIRE(r.days.size() == 1);
  CHECK(r.probabilities[0] == doctest::Approx(1.0));
}

TEST_CASE("reduce_scenarios keeps everything when k equals n") {
  std::vector<HistoryDay> h;
  for (int i = 0; i < 4; ++i) h.push_back(day(date_of(i), {10.0 * i, 5.0}, i));
  const auto r = reduce_scenarios(h, 4);
  CHECK(r.days == std::vector<int>{0, 1, 2, 3});
  for (double p : r.probabilities) CHECK(p == doctest::Approx(0.25));
}

TEST_CASE("reduce_scenarios picks one day per tight cluster") {
  std::vector<HistoryDay> h;
  for (int i = 0; i < 5; ++i) h.push_back(day(date_of(i), {100.0 + i * 0.1, 110.0}, 10.0 + 0.01 * i));
  for (int i = 0; i < 5; ++i) {
    h.push_back(day(date_of(5 + i), {300.0 + i * 0.1, 290.0}, 80.0 + 0.01 * i));
  }
  const auto r = reduce_scenarios(h, 2);
  REQUIRE(r.days.size() == 2);
  CHECK(r.days[0] < 5);
  CHECK(r.days[1] >= 5);
  CHECK(r.probabilities[0] == doctest::Approx(0.5));
  CHECK(r.probabilities[1] == doctest::Approx(0.5));
}

TEST_CASE("reduce_scenarios properties") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(100.0, 15.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + trial % 20;
    std::vector<HistoryDay> h;
    for (int i = 0; i < n; ++i) h.push_back(day(date_of(i), {g(rng), g(rng), g(rng)}, g(rng)));
    const int k = 1 + trial % 5;
    const auto r = reduce_scenarios(h, k);
    CHECK(static_cast<int>(r.days.size()) == k);
    CHECK(sum(r.probabilities) == doctest::Approx(1.0).epsilon(1e-12));
    for (double p : r.probabilities) CHECK(p >= 1.0 / n - 1e-15);
  }
  CHECK_THROWS_AS(reduce_scenarios({day("a", {1}, 1)}, 2), InsufficientHistory);
}

TEST_CASE("normal partition") {
  const auto p = normal_partition();
  CHECK(p[0] == doctest::Approx(0.0668).epsilon(1e-3));
  CHECK(p[1] == doctest::Approx(0.2417).epsilon(1e-3));
  CHECK(p[2] == doctest::Approx(0.3829).epsilon(1e-3));
  CHECK(p[0] + p[1] + p[2] + p[3] + p[4] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p[0] == p[4]);
  CHECK(p[1] == p[3]);
}

TEST_CASE("gaussian_fan") {
  SUBCASE("constant history gives identical curves") {
    const auto fan = gaussian_fan({day("a", {50, 60}, 0), day("b", {50, 60}, 0)});
    REQUIRE(fan.size() == 5);
    for (const auto& c : fan) CHECK(c.total_demand == std::vector<double>{50, 60});
  }
  SUBCASE("mean 100, sd 10") {
    // Two days at 100 +- 10/sqrt(2) give sample sd 10.
    const double h = 10.0 / std::sqrt(2.0);
    const auto fan = gaussian_fan({day("a", {100 - h}, 0), day("b", {100 + h}, 0)});
    const double expected[] = {80, 90, 100, 110, 120};
    for (int k = 0; k < 5; ++k) CHECK(fan[k].total_demand[0] == doctest::Approx(expected[k]));
    double total = 0.0;
    for (const auto& c : fan) total += c.probability;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("clipped at zero") {
    const auto fan = gaussian_fan({day("a", {0}, 0), day("b", {10}, 0)});
    CHECK(fan[0].total_demand[0] == 0.0);
  }
  CHECK_THROWS_AS(gaussian_fan({day("a", {1}, 0)}), InsufficientHistory);
}

TEST_CASE("match_risk_day") {
  const std::vector<HistoryDay> h = {day("2020-07-02", {1}, 20), day("2020-07-01", {1}, 10),
                                     day("2020-07-03", {1}, 30)};
  CHECK(match_risk_day(30, h).date == "2020-07-03");
  CHECK(match_risk_day(15, h).date == "2020-07-01");
  CHECK(match_risk_day(14, h).cumulative_bus_risk == 10);
  CHECK(match_risk_day(16, h).cumulative_bus_risk == 20);
  CHECK_THROWS_AS(match_risk_day(1, {}), InsufficientHistory);
}

TEST_CASE("project_demand") {
  PowerNetwork net = parse_network(testing::three_bus_json());
  SUBCASE("one demand takes the whole curve") {
    const auto m = project_demand({10, 20, 30}, net);
    CHECK(m(0, 0) == 10);
    CHECK(m(0, 2) == 30);
  }
  SUBCASE("peak-proportional split conserves the total") {
    net.demands.push_back(Demand{2, 3, 1000.0, {70, 20, 10}});
    net.demands[0].base_profile = {10, 30, 5};
    const auto m = project_demand({100, 50, 0}, net);
    CHECK(m(0, 0) == doctest::Approx(30));
    CHECK(m(1, 0) == doctest::Approx(70));
    for (int t = 0; t < 3; ++t) {
      CHECK(m(0, t) + m(1, t) == doctest::Approx(std::vector<double>{100, 50, 0}[t]));
    }
  }
  CHECK_THROWS_AS(project_demand({0, 0, 0}, net), ZeroTotal);
  CHECK_THROWS_AS(project_demand({1, 2}, net), DimensionMismatch);
}

TEST_CASE("expected_scenario") {
  Matrix<double> d1(1, 2, 10.0), d2(1, 2, 30.0);
  ScenarioSet set;
  set.scenarios = {Scenario{1, 0.5, d1, {0.2}}, Scenario{2, 0.5, d2, {0.4}}};
  const Scenario e = expected_scenario(set);
  CHECK(e.probability == 1.0);
  CHECK(e.line_pi[0] == doctest::Approx(0.3));
  CHECK(e.demand(0, 1) == doctest::Approx(20.0));

  ScenarioSet one = single_scenario(d1, {0.1});
  const Scenario same = expected_scenario(one);
  CHECK(same.demand == d1);
  CHECK(same.line_pi == std::vector<double>{0.1});

  // Scaling every demand scales the expectation.
  ScenarioSet scaled = set;
  for (auto& s : scaled.scenarios) {
    for (int c = 0; c < 2; ++c) s.demand(0, c) *= 3.0;
  }
  CHECK(expected_scenario(scaled).demand(0, 0) == doctest::Approx(3.0 * e.demand(0, 0)));
}

TEST_CASE("fan expected demand is the mean curve") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(500.0, 40.0);
  PowerNetwork net = parse_network(testing::three_bus_json());
  std::vector<HistoryDay> h;
  for (int i = 0; i < 12; ++i) {
    h.push_back(day(date_of(i), {g(rng), g(rng), g(rng)}, g(rng), {g(rng) / 10.0, g(rng) / 10.0}));
  }
  const ScenarioSet set =
      build_day_ahead_scenarios(net, h, linear_ramp_table(Metric::kWfpi, 10, 1e-5), {});
  CHECK(set.size() == 5);
  const Scenario e = expected_scenario(set);
  for (int t = 0; t < 3; ++t) {
    double mu = 0.0;
    for (const auto& d : h) mu += d.total_demand[t];
    mu /= h.size();
    CHECK(e.demand(0, t) == doctest::Approx(mu).epsilon(1e-12));
  }

  ScenarioOptions tree;
  tree.fan_mode = FanProbabilityMode::kTree;
  const ScenarioSet tset =
      build_day_ahead_scenarios(net, h, linear_ramp_table(Metric::kWfpi, 10, 1e-5), {3, 4}, tree);
  double total = 0.0;
  for (const auto& s : tset.scenarios) total += s.probability;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("line_pi_from_metric") {
  const ReliabilityTable t = linear_ramp_table(Metric::kWfpi, 2, 1e-5);
  CHECK(line_pi_from_metric(0.0, 5, t) == 0.0);
  CHECK(line_pi_from_metric(150.0, 2, t) ==
        doctest::Approx(1.0 - (1.0 - 1e-5) * (1.0 - 1e-5)).epsilon(1e-12));
}

TEST_CASE("history parsing") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  const std::string demand =
      "date,step,total_demand\n2020-07-02,1,5\n2020-07-02,2,6\n2020-07-02,3,7\n"
      "2020-07-01,1,1\n2020-07-01,2,2\n2020-07-01,3,3\n";
  const std::string risk =
      "date,cumulative_bus_risk,line_1,line_2\n2020-07-01,10,1,2\n2020-07-02,20,3,4\n";
  const auto h = parse_history(demand, risk, net);
  REQUIRE(h.size() == 2);
  CHECK(h[0].date == "2020-07-01");
  CHECK(h[0].total_demand == std::vector<double>{1, 2, 3});
  CHECK(h[1].line_metric == std::vector<double>{3, 4});
  CHECK_THROWS_AS(parse_history("date,step,total_demand\n2020-07-01,1,1\n", risk, net), ParseError);
  CHECK_THROWS_AS(parse_history(demand, "date,cumulative_bus_risk,line_1\n", net), ParseError);

  CHECK(parse_total_curve("step,total_demand\n2,5\n1,4\n3,6\n", 3) == std::vector<double>{4, 5, 6});
  CHECK_THROWS_AS(parse_total_curve("step,total_demand\n1,4\n", 3), ParseError);
}

TEST_CASE("scenario set json round trip and validation") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  Matrix<double> d(1, 3, 40.0);
  ScenarioSet set;
  set.scenarios = {Scenario{1, 0.25, d, {0.1, 0.0}}, Scenario{2, 0.75, d, {0.2, 0.3}}};
  CHECK_NOTHROW(validate_scenario_set(set, net));
  const ScenarioSet back = parse_scenario_set(scenario_set_to_json(set));
  REQUIRE(back.size() == 2);
  CHECK(back.scenarios[1].probability == 0.75);
  CHECK(back.scenarios[1].demand == d);
  CHECK(back.scenarios[1].line_pi == set.scenarios[1].line_pi);

  ScenarioSet bad = set;
  bad.scenarios[0].probability = 0.3;
  CHECK_THROWS_AS(validate_scenario_set(bad, net), ValidationError);
  bad = set;
  bad.scenarios[0].line_pi[0] = 1.0;
  CHECK_THROWS_AS(validate_scenario_set(bad, net), ValidationError);
}
