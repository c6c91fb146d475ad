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

#ifndef PSPS_RISK_PIPELINE_HPP_
#define PSPS_RISK_PIPELINE_HPP_

#include <array>
#include <compare>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psps/grid_model.hpp"
#include "psps/matrix.hpp"

namespace psps {

enum class Metric { kWfpi, kWlfp };

const char* to_string(Metric m);
// Accepts "wfpi" / "wlfp" in any case; throws ConfigError otherwise.
Metric parse_metric(std::string_view s);

// Valid value range after sanitization.
double metric_min(Metric m);
double metric_max(Metric m);

struct CellIndex {
  int row = 0;
  int col = 0;
  auto operator<=>(const CellIndex&) const = default;
};

// Lat/lon aligned grid. Row 0 is the northern edge, column 0 the western.
struct RasterGeometry {
  double xll = 0.0;  // longitude of the lower-left corner
  double yll = 0.0;  // latitude of the lower-left corner
  double cell_size = 1.0;
  int rows = 1;
  int cols = 1;

  GeoPoint center(CellIndex c) const;
  // Center of cell (0,0).
  GeoPoint origin() const { return center({0, 0}); }
  bool contains(GeoPoint p) const;
  // Cell containing `p`; points on the far edges map to the last cell.
  // Throws OutOfExtent.
  CellIndex cell_of(GeoPoint p) const;
};

struct RiskRaster {
  Metric metric = Metric::kWfpi;
  RasterGeometry geometry;
  Matrix<double> values;
  std::string date;
  // Cells equal to the file's NODATA value; stored as 0 (non-burnable).
  long nodata_cells = 0;
};

RiskRaster parse_raster(const std::string& text, Metric metric, std::string date = "");
RiskRaster load_raster(const std::filesystem::path& path, Metric metric, std::string date = "");
std::string raster_to_text(const RiskRaster& raster);

// Tallies of values altered during sanitization.
struct SanitizeCounters {
  long nan = 0;
  long clamped = 0;
  long sentinel = 0;
  long warnings() const { return nan + clamped; }
};

// WFPI codes 249-254 become 0; NaN becomes 0; everything else is clamped
// to [metric_min, metric_max].
double sanitize_metric(double raw, Metric metric, SanitizeCounters* counters = nullptr);

// Integer Bresenham traversal between two cells, inclusive of both ends.
std::vector<CellIndex> bresenham(CellIndex a, CellIndex b);
std::vector<CellIndex> rasterize_line(const std::array<GeoPoint, 2>& endpoints,
                                      const RasterGeometry& geometry);

// The 2x2 block of cells whose centers bracket `p` (clamped at the
// raster border).
std::array<CellIndex, 4> bus_block(GeoPoint p, const RasterGeometry& geometry);
double bus_metric(GeoPoint p, const RiskRaster& raster, SanitizeCounters* counters = nullptr);

struct ReliabilityBin {
  double value_lo = 0.0;
  double value_hi = 0.0;
  double mean_owip = 0.0;
};

// Maps a metric value to an observed ignition probability. The first bin
// is closed on both sides, later bins are (lo, hi].
struct ReliabilityTable {
  Metric metric = Metric::kWfpi;
  std::vector<ReliabilityBin> bins;
};

ReliabilityTable parse_reliability_table(const std::string& csv, Metric metric);
ReliabilityTable load_reliability_table(const std::filesystem::path& path, Metric metric);
// Throws ValidationError unless bins are contiguous, cover the metric's
// full range, and carry probabilities in [0,1].
void validate_table(const ReliabilityTable& table);
// Linear ramp of `bins` equal bins from 0 up to `max_owip` across the
// metric's range.
ReliabilityTable linear_ramp_table(Metric metric, int bins, double max_owip);

// Throws NoBin outside the table's coverage.
double metric_to_wip(double value, const ReliabilityTable& table);

// 1 - prod(1 - p_k), evaluated in log space for small p.
double line_ignition_probability(std::span<const double> cell_wips);

inline constexpr double kZeroRiskLogSentinel = -1e9;

struct LineRisk {
  int line_id = 0;
  // Per step; constant within a day.
  std::vector<double> pi;
  std::vector<double> log_pi;
  std::vector<double> log_one_minus_pi;
  // Raw metric summary used by metric-sum budgets: the largest sanitized
  // cell value on the line (or of the endpoint buses).
  double metric_value = 0.0;
  std::vector<CellIndex> cells;

  bool zero_risk() const;
};

// Builds a LineRisk with the log terms filled in. `pi` must be in [0,1).
LineRisk make_line_risk(int line_id, double pi, int horizon, double metric_value = 0.0,
                        std::vector<CellIndex> cells = {});

enum class LineAggregation {
  // Bresenham cells plus both endpoint-bus blocks, combined as
  // independent cell ignitions.
  kCellProduct,
  // Largest endpoint-bus metric, mapped through the table once.
  kEndpointMax,
};

std::vector<LineRisk> build_line_risk(const PowerNetwork& net, const RiskRaster& raster,
                                      const ReliabilityTable& table,
                                      LineAggregation aggregation = LineAggregation::kCellProduct,
                                      SanitizeCounters* counters = nullptr);

std::string line_risk_to_json(const std::vector<LineRisk>& risks);
std::vector<LineRisk> parse_line_risk_json(const std::string& text);

}  // namespace psps

#endif  // PSPS_RISK_PIPELINE_HPP_
