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

#include "psps/risk_pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"
#include "psps/csv.hpp"
#include "psps/error.hpp"

namespace psps {

const char* to_string(Metric m) { return m == Metric::kWfpi ? "wfpi" : "wlfp"; }

Metric parse_metric(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "wfpi") return Metric::kWfpi;
  if (lower == "wlfp") return Metric::kWlfp;
  throw ConfigError("unknown metric '" + std::string(s) + "' (expected wfpi or wlfp)");
}

double metric_min(Metric) { return 0.0; }
double metric_max(Metric m) { return m == Metric::kWfpi ? 150.0 : 1e-3; }

GeoPoint RasterGeometry::center(CellIndex c) const {
  return GeoPoint{yll + (rows - c.row - 0.5) * cell_size, xll + (c.col + 0.5) * cell_size};
}

bool RasterGeometry::contains(GeoPoint p) const {
  return p.longitude >= xll && p.longitude <= xll + cols * cell_size && p.latitude >= yll &&
         p.latitude <= yll + rows * cell_size;
}

CellIndex RasterGeometry::cell_of(GeoPoint p) const {
  if (!contains(p)) {
    std::ostringstream os;
    os << "point (" << p.latitude << ", " << p.longitude << ") outside raster extent";
    throw OutOfExtent(os.str());
  }
  int c = static_cast<int>(std::floor((p.longitude - xll) / cell_size));
  int r = static_cast<int>(std::floor((yll + rows * cell_size - p.latitude) / cell_size));
  return CellIndex{std::clamp(r, 0, rows - 1), std::clamp(c, 0, cols - 1)};
}

RiskRaster parse_raster(const std::string& text, Metric metric, std::string date) {
  RiskRaster raster;
  raster.metric = metric;
  raster.date = std::move(date);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  double nodata = -9999.0;
  bool have[5] = {false, false, false, false, false};
  bool x_center = false;
  bool y_center = false;
  std::vector<double> values;
  int value_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (std::isalpha(static_cast<unsigned char>(key[0]))) {
      std::string lower = key;
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      std::string v;
      if (!(ls >> v)) throw ParseError("raster: header '" + key + "' has no value", line_no);
      const double num = parse_double(v, "raster header '" + key + "'", line_no);
      if (lower == "ncols") {
        raster.geometry.cols = static_cast<int>(num);
        have[0] = true;
      } else if (lower == "nrows") {
        raster.geometry.rows = static_cast<int>(num);
        have[1] = true;
      } else if (lower == "xllcorner" || lower == "xllcenter") {
        raster.geometry.xll = num;
        x_center = lower == "xllcenter";
        have[2] = true;
      } else if (lower == "yllcorner" || lower == "yllcenter") {
        raster.geometry.yll = num;
        y_center = lower == "yllcenter";
        have[3] = true;
      } else if (lower == "cellsize") {
        raster.geometry.cell_size = num;
        have[4] = true;
      } else if (lower == "nodata_value") {
        nodata = num;
      } else {
        throw ParseError("raster: unknown header '" + key + "'", line_no);
      }
      continue;
    }
    if (value_line == 0) value_line = line_no;
    ls.clear();
    ls.str(line);
    std::string tok;
    while (ls >> tok) values.push_back(parse_double(tok, "raster value", line_no));
  }
  for (bool h : have) {
    if (!h) throw ParseError("raster: missing one of ncols/nrows/xllcorner/yllcorner/cellsize");
  }
  RasterGeometry& g = raster.geometry;
  if (g.rows < 1 || g.cols < 1 || !(g.cell_size > 0.0)) {
    throw ParseError("raster: rows, cols and cellsize must be positive");
  }
  if (x_center) g.xll -= 0.5 * g.cell_size;
  if (y_center) g.yll -= 0.5 * g.cell_size;
  if (values.size() != static_cast<std::size_t>(g.rows) * g.cols) {
    throw ParseError("raster: expected " + std::to_string(g.rows * g.cols) + " values, found " +
                         std::to_string(values.size()),
                     value_line);
  }
  raster.values = Matrix<double>(g.rows, g.cols);
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      double v = values[static_cast<std::size_t>(r) * g.cols + c];
      if (v == nodata) {
        v = 0.0;
        ++raster.nodata_cells;
      }
      raster.values(r, c) = v;
    }
  }
  return raster;
}

RiskRaster load_raster(const std::filesystem::path& path, Metric metric, std::string date) {
  return parse_raster(read_text_file(path), metric, std::move(date));
}

std::string raster_to_text(const RiskRaster& raster) {
  const RasterGeometry& g = raster.geometry;
  std::ostringstream os;
  os << "ncols " << g.cols << "\nnrows " << g.rows << "\nxllcorner " << format_double(g.xll)
     << "\nyllcorner " << format_double(g.yll) << "\ncellsize " << format_double(g.cell_size)
     << "\nNODATA_value -9999\n";
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      if (c) os << ' ';
      os << format_double(raster.values(r, c));
    }
    os << '\n';
  }
  return os.str();
}

double sanitize_metric(double raw, Metric metric, SanitizeCounters* counters) {
  if (std::isnan(raw)) {
    if (counters) ++counters->nan;
    return 0.0;
  }
  if (metric == Metric::kWfpi && raw >= 249.0 && raw <= 254.0) {
    if (counters) ++counters->sentinel;
    return 0.0;
  }
  const double lo = metric_min(metric);
  const double hi = metric_max(metric);
  if (raw < lo || raw > hi) {
    if (counters) ++counters->clamped;
    return std::clamp(raw, lo, hi);
  }
  return raw;
}

std::vector<CellIndex> bresenham(CellIndex a, CellIndex b) {
  std::vector<CellIndex> out;
  const int dr = std::abs(b.row - a.row);
  const int dc = -std::abs(b.col - a.col);
  const int sr = a.row < b.row ? 1 : -1;
  const int sc = a.col < b.col ? 1 : -1;
  int err = dr + dc;
  CellIndex p = a;
  out.reserve(static_cast<std::size_t>(std::max(dr, -dc)) + 1);
  for (;;) {
    out.push_back(p);
    if (p == b) break;
    const int e2 = 2 * err;
    if (e2 >= dc) {
      err += dc;
      p.row += sr;
    }
    if (e2 <= dr) {
      err += dr;
      p.col += sc;
    }
  }
  return out;
}

std::vector<CellIndex> rasterize_line(const std::array<GeoPoint, 2>& endpoints,
                                      const RasterGeometry& geometry) {
  return bresenham(geometry.cell_of(endpoints[0]), geometry.cell_of(endpoints[1]));
}

std::array<CellIndex, 4> bus_block(GeoPoint p, const RasterGeometry& g) {
  if (!g.contains(p)) {
    std::ostringstream os;
    os << "bus (" << p.latitude << ", " << p.longitude << ") outside raster extent";
    throw OutOfExtent(os.str());
  }
  const double fc = (p.longitude - (g.xll + 0.5 * g.cell_size)) / g.cell_size;
  const double fr = ((g.yll + (g.rows - 0.5) * g.cell_size) - p.latitude) / g.cell_size;
  const int c0 = std::clamp(static_cast<int>(std::floor(fc)), 0, std::max(0, g.cols - 2));
  const int r0 = std::clamp(static_cast<int>(std::floor(fr)), 0, std::max(0, g.rows - 2));
  const int c1 = std::min(c0 + 1, g.cols - 1);
  const int r1 = std::min(r0 + 1, g.rows - 1);
  return {CellIndex{r0, c0}, CellIndex{r0, c1}, CellIndex{r1, c0}, CellIndex{r1, c1}};
}

double bus_metric(GeoPoint p, const RiskRaster& raster, SanitizeCounters* counters) {
  double sum = 0.0;
  for (CellIndex c : bus_block(p, raster.geometry)) {
    sum += sanitize_metric(raster.values(c.row, c.col), raster.metric, counters);
  }
  return sum / 4.0;
}

ReliabilityTable parse_reliability_table(const std::string& csv, Metric metric) {
  const CsvTable t = parse_csv(csv, "reliability table");
  const int lo = t.column("value_lo");
  const int hi = t.column("value_hi");
  const int p = t.column("mean_owip");
  ReliabilityTable table;
  table.metric = metric;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    table.bins.push_back(ReliabilityBin{t.number(r, lo), t.number(r, hi), t.number(r, p)});
  }
  validate_table(table);
  return table;
}

ReliabilityTable load_reliability_table(const std::filesystem::path& path, Metric metric) {
  return parse_reliability_table(read_text_file(path), metric);
}

void validate_table(const ReliabilityTable& table) {
  if (table.bins.empty()) throw ValidationError("reliability table: no bins");
  for (std::size_t i = 0; i < table.bins.size(); ++i) {
    const ReliabilityBin& b = table.bins[i];
    const std::string e = "reliability table bin " + std::to_string(i + 1);
    if (!(b.value_lo < b.value_hi)) throw ValidationError(e + ": value_lo must be < value_hi");
    if (!(b.mean_owip >= 0.0 && b.mean_owip <= 1.0)) {
      throw ValidationError(e + ": mean_owip must be in [0,1]");
    }
    if (i > 0 && b.value_lo != table.bins[i - 1].value_hi) {
      throw ValidationError(e + ": bins must be contiguous without overlap");
    }
  }
  if (table.bins.front().value_lo > metric_min(table.metric) ||
      table.bins.back().value_hi < metric_max(table.metric)) {
    throw ValidationError("reliability table: bins do not cover the metric range");
  }
}

ReliabilityTable linear_ramp_table(Metric metric, int bins, double max_owip) {
  ReliabilityTable t;
  t.metric = metric;
  const double lo = metric_min(metric);
  const double hi = metric_max(metric);
  for (int i = 0; i < bins; ++i) {
    const double a = i == 0 ? lo : t.bins.back().value_hi;
    const double b = i + 1 == bins ? hi : lo + (hi - lo) * (i + 1) / bins;
    t.bins.push_back(ReliabilityBin{a, b, max_owip * i / std::max(1, bins - 1)});
  }
  return t;
}

double metric_to_wip(double value, const ReliabilityTable& table) {
  for (std::size_t i = 0; i < table.bins.size(); ++i) {
    const ReliabilityBin& b = table.bins[i];
    const bool above_lo = i == 0 ? value >= b.value_lo : value > b.value_lo;
    if (above_lo && value <= b.value_hi) return b.mean_owip;
  }
  std::ostringstream os;
  os << "value " << value << " outside reliability table coverage";
  throw NoBin(os.str());
}

double line_ignition_probability(std::span<const double> cell_wips) {
  double log_survive = 0.0;
  for (double p : cell_wips) {
    if (p >= 1.0) return 1.0;
    log_survive += std::log1p(-p);
  }
  return -std::expm1(log_survive);
}

bool LineRisk::zero_risk() const {
  return std::all_of(pi.begin(), pi.end(), [](double p) { return p == 0.0; });
}

LineRisk make_line_risk(int line_id, double pi, int horizon, double metric_value,
                        std::vector<CellIndex> cells) {
  if (!(pi >= 0.0 && pi < 1.0)) {
    throw ValidationError("line " + std::to_string(line_id) + ": ignition probability " +
                          std::to_string(pi) + " outside [0,1)");
  }
  LineRisk r;
  r.line_id = line_id;
  r.pi.assign(horizon, pi);
  r.log_pi.assign(horizon, pi > 0.0 ? std::log(pi) : kZeroRiskLogSentinel);
  r.log_one_minus_pi.assign(horizon, std::log1p(-pi));
  r.metric_value = metric_value;
  r.cells = std::move(cells);
  return r;
}

std::vector<LineRisk> build_line_risk(const PowerNetwork& net, const RiskRaster& raster,
                                      const ReliabilityTable& table,
                                      LineAggregation aggregation,
                                      SanitizeCounters* counters) {
  std::vector<LineRisk> out;
  out.reserve(net.lines.size());
  for (const Line& line : net.lines) {
    const Bus& from = net.bus(line.from_bus);
    const Bus& to = net.bus(line.to_bus);
    const GeoPoint pf{from.latitude, from.longitude};
    const GeoPoint pt{to.latitude, to.longitude};
    std::vector<CellIndex> cells;
    std::set<CellIndex> seen;
    auto add = [&](CellIndex c) {
      if (seen.insert(c).second) cells.push_back(c);
    };

    if (aggregation == LineAggregation::kEndpointMax) {
      for (CellIndex c : bus_block(pf, raster.geometry)) add(c);
      for (CellIndex c : bus_block(pt, raster.geometry)) add(c);
      const double m = std::max(bus_metric(pf, raster, counters), bus_metric(pt, raster, counters));
      out.push_back(make_line_risk(line.id, metric_to_wip(m, table), net.horizon, m,
                                   std::move(cells)));
      continue;
    }

    for (CellIndex c : rasterize_line(line.endpoints, raster.geometry)) add(c);
    for (CellIndex c : bus_block(pf, raster.geometry)) add(c);
    for (CellIndex c : bus_block(pt, raster.geometry)) add(c);
    std::vector<double> wips;
    wips.reserve(cells.size());
    double peak = 0.0;
    for (CellIndex c : cells) {
      const double v = sanitize_metric(raster.values(c.row, c.col), raster.metric, counters);
      peak = std::max(peak, v);
      wips.push_back(metric_to_wip(v, table));
    }
    out.push_back(make_line_risk(line.id, line_ignition_probability(wips), net.horizon, peak,
                                 std::move(cells)));
  }
  return out;
}

std::string line_risk_to_json(const std::vector<LineRisk>& risks) {
  nlohmann::json root = nlohmann::json::array();
  for (const LineRisk& r : risks) {
    nlohmann::json cells = nlohmann::json::array();
    for (CellIndex c : r.cells) cells.push_back({c.row, c.col});
    root.push_back({{"line", r.line_id},
                    {"pi", r.pi},
                    {"log_pi", r.log_pi},
                    {"log_one_minus_pi", r.log_one_minus_pi},
                    {"metric_value", r.metric_value},
                    {"cells", cells}});
  }
  return nlohmann::json{{"lines", root}}.dump(2) + "\n";
}

std::vector<LineRisk> parse_line_risk_json(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("line risk: malformed JSON: ") + e.what());
  }
  std::vector<LineRisk> out;
  try {
    for (const auto& l : root.at("lines")) {
      const auto pi = l.at("pi").get<std::vector<double>>();
      if (pi.empty()) throw ParseError("line risk: empty pi series");
      std::vector<CellIndex> cells;
      if (l.contains("cells")) {
        for (const auto& c : l["cells"]) cells.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
      }
      LineRisk r = make_line_risk(l.at("line").get<int>(), pi[0], static_cast<int>(pi.size()),
                                  l.value("metric_value", 0.0), std::move(cells));
      for (std::size_t t = 0; t < pi.size(); ++t) {
        LineRisk step = make_line_risk(r.line_id, pi[t], 1);
        r.pi[t] = step.pi[0];
        r.log_pi[t] = step.log_pi[0];
        r.log_one_minus_pi[t] = step.log_one_minus_pi[0];
      }
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("line risk: ") + e.what());
  }
  return out;
}

}  // namespace psps
