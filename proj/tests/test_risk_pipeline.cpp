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
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "psps/error.hpp"
#include "psps/grid_model.hpp"
#include "psps/risk_pipeline.hpp"

using namespace psps;

namespace {

// Rounding DDA along the major axis. Agrees with Bresenham wherever the
// minor coordinate never lands exactly on a half cell.
std::vector<CellIndex> dda(CellIndex a, CellIndex b) {
  const int dr = b.row - a.row;
  const int dc = b.col - a.col;
  const int n = std::max(std::abs(dr), std::abs(dc));
  std::vector<CellIndex> out;
  for (int k = 0; k <= n; ++k) {
    const double t = n == 0 ? 0.0 : static_cast<double>(k) / n;
    out.push_back({static_cast<int>(std::lround(a.row + t * dr)),
                   static_cast<int>(std::lround(a.col + t * dc))});
  }
  return out;
}

bool has_half_tie(CellIndex a, CellIndex b) {
  const int dr = std::abs(b.row - a.row);
  const int dc = std::abs(b.col - a.col);
  const int n = std::max(dr, dc);
  const int minor = std::min(dr, dc);
  if (n == 0) return false;
  for (int k = 0; k <= n; ++k) {
    if ((2 * k * minor) % (2 * n) == n) return true;
  }
  return false;
}

RiskRaster make_raster(Metric metric, int rows, int cols, const std::vector<double>& values) {
  RiskRaster r;
  r.metric = metric;
  r.geometry = RasterGeometry{-121.0, 37.0, 0.1, rows, cols};
  r.values = Matrix<double>(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) r.values(i, j) = values[i * cols + j];
  }
  return r;
}

ReliabilityTable step_table() {
  ReliabilityTable t;
  t.metric = Metric::kWfpi;
  t.bins = {{0.0, 50.0, 0.0}, {50.0, 100.0, 2e-6}, {100.0, 150.0, 5e-6}};
  return t;
}

}  // namespace

TEST_CASE("sanitize_metric") {
  SanitizeCounters c;
  CHECK(sanitize_metric(251.0, Metric::kWfpi, &c) == 0.0);
  CHECK(c.sentinel == 1);
  CHECK(sanitize_metric(75.0, Metric::kWfpi, &c) == 75.0);
  CHECK(sanitize_metric(-3.0, Metric::kWfpi, &c) == 0.0);
  CHECK(c.clamped == 1);
  CHECK(sanitize_metric(std::nan(""), Metric::kWfpi, &c) == 0.0);
  CHECK(c.nan == 1);
  CHECK(c.warnings() == 2);
  CHECK(sanitize_metric(200.0, Metric::kWfpi) == 150.0);
  CHECK(sanitize_metric(0.5, Metric::kWlfp) == 1e-3);
  CHECK(sanitize_metric(251.0, Metric::kWlfp) == 1e-3);
}

TEST_CASE("sanitize_metric is idempotent") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 300.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(rng);
    for (Metric m : {Metric::kWfpi, Metric::kWlfp}) {
      const double once = sanitize_metric(x, m);
      CHECK(sanitize_metric(once, m) == once);
      CHECK(once >= metric_min(m));
      CHECK(once <= metric_max(m));
    }
  }
}

TEST_CASE("bresenham fixed traces") {
  CHECK(bresenham({0, 0}, {3, 3}) ==
        std::vector<CellIndex>{{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  const auto row = bresenham({0, 0}, {0, 4});
  CHECK(row.size() == 5);
  CHECK(std::all_of(row.begin(), row.end(), [](CellIndex c) { return c.row == 0; }));
  CHECK(bresenham({0, 0}, {5, 2}) ==
        std::vector<CellIndex>{{0, 0}, {1, 0}, {2, 1}, {3, 1}, {4, 2}, {5, 2}});
  CHECK(bresenham({2, 2}, {2, 2}) == std::vector<CellIndex>{{2, 2}});
}

TEST_CASE("bresenham matches a rounding DDA and has the expected length") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> u(0, 30);
  int compared = 0;
  for (int i = 0; i < 3000; ++i) {
    const CellIndex a{u(rng), u(rng)};
    const CellIndex b{u(rng), u(rng)};
    const auto trace = bresenham(a, b);
    CHECK(trace.size() ==
          static_cast<std::size_t>(std::max(std::abs(a.row - b.row), std::abs(a.col - b.col))) + 1);
    CHECK(trace.front() == a);
    CHECK(trace.back() == b);
    if (!has_half_tie(a, b)) {
      CHECK(trace == dda(a, b));
      ++compared;
    }
  }
  CHECK(compared > 1000);
}

TEST_CASE("cell_of and extent") {
  const RasterGeometry g{-121.0, 37.0, 0.1, 10, 20};
  CHECK(g.cell_of({37.95, -120.95}) == CellIndex{0, 0});
  CHECK(g.cell_of({37.05, -119.05}) == CellIndex{9, 19});
  CHECK(g.cell_of({37.0, -119.0}) == CellIndex{9, 19});
  CHECK(g.origin().latitude == doctest::Approx(37.95));
  CHECK(g.origin().longitude == doctest::Approx(-120.95));
  CHECK_THROWS_AS(g.cell_of({36.9, -120.5}), OutOfExtent);
  CHECK_THROWS_AS(rasterize_line({GeoPoint{37.5, -120.5}, GeoPoint{37.5, -118.0}}, g),
                  OutOfExtent);
}

TEST_CASE("bus_metric averages the bracketing block") {
  const GeoPoint center{37.1, -120.9};  // shared corner of the four cells
  CHECK(bus_metric(center, make_raster(Metric::kWfpi, 2, 2, {10, 20, 30, 40})) == 25.0);
  CHECK(bus_metric(center, make_raster(Metric::kWfpi, 2, 2, {0, 0, 0, 0})) == 0.0);
  SanitizeCounters c;
  CHECK(bus_metric(center, make_raster(Metric::kWfpi, 2, 2, {100, 251, 50, 50}), &c) == 50.0);
  CHECK(c.sentinel == 1);
  CHECK_THROWS_AS(bus_metric({40.0, -120.9}, make_raster(Metric::kWfpi, 2, 2, {0, 0, 0, 0})),
                  OutOfExtent);
}

TEST_CASE("bus_block clamps at the border") {
  const RasterGeometry g{-121.0, 37.0, 0.1, 4, 4};
  const auto corner = bus_block({37.39, -120.99}, g);
  CHECK(corner[0] == CellIndex{0, 0});
  CHECK(corner[3] == CellIndex{1, 1});
  const auto inner = bus_block({37.2, -120.8}, g);
  CHECK(inner[0] == CellIndex{1, 1});
  CHECK(inner[3] == CellIndex{2, 2});
}

TEST_CASE("metric_to_wip bins") {
  const ReliabilityTable t = step_table();
  CHECK(metric_to_wip(0.0, t) == 0.0);
  CHECK(metric_to_wip(75.0, t) == 2e-6);
  CHECK(metric_to_wip(100.0, t) == 2e-6);
  CHECK(metric_to_wip(100.5, t) == 5e-6);
  CHECK(metric_to_wip(150.0, t) == 5e-6);
  CHECK_THROWS_AS(metric_to_wip(151.0, t), NoBin);
  CHECK_THROWS_AS(metric_to_wip(-1.0, t), NoBin);
}

TEST_CASE("reliability table parsing and validation") {
  const ReliabilityTable t = parse_reliability_table(
      "value_lo,value_hi,mean_owip\n0,50,0\n50,100,2e-6\n100,150,5e-6\n", Metric::kWfpi);
  CHECK(t.bins.size() == 3);
  CHECK(t.bins[1].mean_owip == 2e-6);
  CHECK_THROWS_AS(parse_reliability_table("value_lo,value_hi,mean_owip\n0,50,0\n60,150,1e-6\n",
                                          Metric::kWfpi),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_reliability_table("value_lo,value_hi,mean_owip\n0,100,0\n", Metric::kWfpi),
      ValidationError);
  CHECK_THROWS_AS(
      parse_reliability_table("value_lo,value_hi,mean_owip\n0,150,1.5\n", Metric::kWfpi),
      ValidationError);
  CHECK_THROWS_AS(parse_reliability_table("value_lo,value_hi\n0,150\n", Metric::kWfpi),
                  ParseError);

  const ReliabilityTable ramp = linear_ramp_table(Metric::kWfpi, 10, 1e-5);
  CHECK_NOTHROW(validate_table(ramp));
  CHECK(metric_to_wip(0.0, ramp) == 0.0);
  CHECK(metric_to_wip(150.0, ramp) == doctest::Approx(1e-5));
  CHECK_NOTHROW(validate_table(linear_ramp_table(Metric::kWlfp, 5, 1e-5)));
}

TEST_CASE("line_ignition_probability examples") {
  CHECK(line_ignition_probability(std::vector<double>{0, 0, 0}) == 0.0);
  CHECK(line_ignition_probability(std::vector<double>{0.5, 0.5}) == doctest::Approx(0.75));
  const std::vector<double> ten(10, 1e-6);
  double survive = 1.0;
  for (double p : ten) survive *= 1.0 - p;
  CHECK(line_ignition_probability(ten) == doctest::Approx(1.0 - survive).epsilon(1e-9));
  CHECK(line_ignition_probability(ten) == doctest::Approx(9.999955e-6).epsilon(1e-6));
  CHECK(line_ignition_probability(std::vector<double>{0.2, 1.0}) == 1.0);
}

TEST_CASE("line_ignition_probability properties") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> xs(len(rng));
    for (double& x : xs) x = u(rng) * (trial % 2 ? 1.0 : 1e-4);
    const double p = line_ignition_probability(xs);
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double max = *std::max_element(xs.begin(), xs.end());
    CHECK(p >= max * (1.0 - 1e-12));
    CHECK(p <= std::min(1.0, sum) * (1.0 + 1e-12));

    std::vector<double> shuffled = xs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(line_ignition_probability(shuffled) == doctest::Approx(p).epsilon(1e-14));

    std::vector<double> bumped = xs;
    const std::size_t k = trial % xs.size();
    bumped[k] = std::min(1.0, bumped[k] + u(rng) * 0.1);
    CHECK(line_ignition_probability(bumped) >= p);
  }
}

TEST_CASE("make_line_risk log terms") {
  for (double pi : {1e-9, 1e-6, 0.01, 0.3, 0.9}) {
    const LineRisk r = make_line_risk(1, pi, 4);
    REQUIRE(r.pi.size() == 4);
    for (int t = 0; t < 4; ++t) {
      CHECK(std::exp(r.log_pi[t]) == doctest::Approx(pi).epsilon(1e-12));
      CHECK(std::exp(r.log_one_minus_pi[t]) == doctest::Approx(1.0 - pi).epsilon(1e-12));
    }
  }
  const LineRisk zero = make_line_risk(2, 0.0, 3);
  CHECK(zero.zero_risk());
  CHECK(zero.log_pi[0] == kZeroRiskLogSentinel);
  CHECK(zero.log_one_minus_pi[0] == 0.0);
  CHECK_THROWS_AS(make_line_risk(3, 1.0, 3), ValidationError);
}

TEST_CASE("raster text parsing") {
  const std::string text =
      "NCOLS 3\nnrows 2\nxllcorner -121\nyllcorner 37\ncellsize 0.5\nNODATA_value -9999\n"
      "1 2 3\n4 -9999 6\n";
  const RiskRaster r = parse_raster(text, Metric::kWfpi, "2020-09-08");
  CHECK(r.geometry.cols == 3);
  CHECK(r.geometry.rows == 2);
  CHECK(r.values(0, 2) == 3.0);
  CHECK(r.values(1, 1) == 0.0);
  CHECK(r.nodata_cells == 1);
  CHECK(r.date == "2020-09-08");

  const RiskRaster again = parse_raster(raster_to_text(r), Metric::kWfpi);
  CHECK(again.values == r.values);
  CHECK(again.geometry.xll == r.geometry.xll);

  const RiskRaster centered = parse_raster(
      "ncols 1\nnrows 1\nxllcenter -120.75\nyllcenter 37.25\ncellsize 0.5\n7\n", Metric::kWfpi);
  CHECK(centered.geometry.xll == -121.0);
  CHECK(centered.geometry.yll == 37.0);

  try {
    parse_raster("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3 x\n",
                 Metric::kWfpi);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
  }
  CHECK_THROWS_AS(
      parse_raster("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n",
                   Metric::kWfpi),
      ParseError);
  CHECK_THROWS_AS(parse_raster("ncols 2\nnrows 2\n1 2 3 4\n", Metric::kWfpi), ParseError);
}

TEST_CASE("build_line_risk") {
  PowerNetwork net;
  net.horizon = 4;
  net.buses = {{1, "a", 37.15, -120.95}, {2, "b", 37.05, -120.95}};
  Line line;
  line.id = 1;
  line.from_bus = 1;
  line.to_bus = 2;
  line.susceptance = 1.0;
  line.endpoints = {GeoPoint{37.15, -120.95}, GeoPoint{37.05, -120.95}};
  net.lines = {line};

  SUBCASE("zero-risk cells give zero probability") {
    const auto risks =
        build_line_risk(net, make_raster(Metric::kWfpi, 2, 2, {10, 0, 251, 20}), step_table());
    REQUIRE(risks.size() == 1);
    CHECK(risks[0].zero_risk());
    CHECK(risks[0].pi.size() == 4);
    CHECK(risks[0].cells.size() == 4);
  }
  SUBCASE("two risky cells combine as independent events") {
    ReliabilityTable t = step_table();
    t.bins[1].mean_owip = 1e-6;
    const auto risks =
        build_line_risk(net, make_raster(Metric::kWfpi, 2, 2, {75, 0, 60, 0}), t);
    const double expected = 1.0 - (1.0 - 1e-6) * (1.0 - 1e-6);
    for (double pi : risks[0].pi) CHECK(pi == doctest::Approx(expected).epsilon(1e-12));
    CHECK(risks[0].metric_value == 75.0);
  }
  SUBCASE("endpoint-max uses the larger bus average") {
    const auto risks = build_line_risk(net, make_raster(Metric::kWfpi, 2, 2, {200, 200, 60, 60}),
                                       step_table(), LineAggregation::kEndpointMax);
    CHECK(risks[0].metric_value == doctest::Approx(105.0));
    CHECK(risks[0].pi[0] == 5e-6);
  }
  SUBCASE("json round trip") {
    const auto risks =
        build_line_risk(net, make_raster(Metric::kWfpi, 2, 2, {75, 0, 60, 0}), step_table());
    const auto back = parse_line_risk_json(line_risk_to_json(risks));
    REQUIRE(back.size() == 1);
    CHECK(back[0].pi == risks[0].pi);
    CHECK(back[0].log_pi == risks[0].log_pi);
    CHECK(back[0].cells == risks[0].cells);
  }
}
