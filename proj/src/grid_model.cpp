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

#include "psps/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "psps/error.hpp"

namespace psps {
namespace {

using nlohmann::json;

int line_of_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
}

template <typename T>
T field(const json& obj, const char* key, const std::string& entity) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(entity + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(entity + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& obj, const char* key, const std::string& entity, T fallback) {
  if (!obj.contains(key)) return fallback;
  return field<T>(obj, key, entity);
}

const json& array_field(const json& root, const char* key) {
  auto it = root.find(key);
  if (it == root.end() || !it->is_array()) {
    throw ParseError(std::string("network: missing array '") + key + "'");
  }
  return *it;
}

void add(std::vector<Diagnostic>& out, const std::string& entity, const std::string& field,
         const std::string& rule) {
  out.push_back(Diagnostic{entity, field, rule});
}

}  // namespace

std::vector<Diagnostic> validate_network(const PowerNetwork& net) {
  std::vector<Diagnostic> out;
  if (net.horizon < 1) add(out, "network", "horizon", "horizon must be >= 1");
  if (!(net.step_hours > 0.0)) add(out, "network", "step_hours", "step_hours must be > 0");

  std::set<int> bus_ids;
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    const Bus& b = net.buses[i];
    const std::string e = "bus " + std::to_string(b.id);
    if (!bus_ids.insert(b.id).second) add(out, e, "id", "duplicate bus id");
    if (b.id != static_cast<int>(i) + 1) {
      add(out, e, "id", "bus ids must be contiguous 1..N in order");
    }
    if (!(std::abs(b.latitude) <= 90.0)) add(out, e, "latitude", "|latitude| must be <= 90");
    if (!(std::abs(b.longitude) <= 180.0)) add(out, e, "longitude", "|longitude| must be <= 180");
  }
  auto known = [&](int id) { return bus_ids.count(id) > 0; };

  std::set<int> ids;
  for (const Line& l : net.lines) {
    const std::string e = "line " + std::to_string(l.id);
    if (!ids.insert(l.id).second) add(out, e, "id", "duplicate line id");
    if (!known(l.from_bus)) add(out, e, "from_bus", "unknown bus " + std::to_string(l.from_bus));
    if (!known(l.to_bus)) add(out, e, "to_bus", "unknown bus " + std::to_string(l.to_bus));
    if (l.from_bus == l.to_bus) add(out, e, "to_bus", "from_bus must differ from to_bus");
    if (!(l.flow_min <= 0.0 && 0.0 <= l.flow_max)) {
      add(out, e, "flow_min", "flow limits must satisfy flow_min <= 0 <= flow_max");
    }
    if (!(l.susceptance > 0.0)) add(out, e, "susceptance", "susceptance must be > 0");
    for (const GeoPoint& p : l.endpoints) {
      if (!(std::abs(p.latitude) <= 90.0 && std::abs(p.longitude) <= 180.0)) {
        add(out, e, "endpoints", "endpoint coordinates out of range");
      }
    }
  }

  ids.clear();
  double max_cost = 0.0;
  for (const Generator& g : net.generators) {
    const std::string e = "generator " + std::to_string(g.id);
    if (!ids.insert(g.id).second) add(out, e, "id", "duplicate generator id");
    if (!known(g.bus)) add(out, e, "bus", "unknown bus " + std::to_string(g.bus));
    if (!(g.p_min >= 0.0)) add(out, e, "p_min", "p_min must be >= 0");
    if (!(g.p_min <= g.p_max)) add(out, e, "p_max", "p_min must be <= p_max");
    if (!(g.ramp_down < 0.0)) add(out, e, "ramp_down", "ramp_down must be < 0");
    if (!(g.ramp_up > 0.0)) add(out, e, "ramp_up", "ramp_up must be > 0");
    if (g.min_up < 1) add(out, e, "min_up", "min_up must be >= 1");
    if (g.min_down < 1) add(out, e, "min_down", "min_down must be >= 1");
    if (!(g.marginal_cost >= 0.0)) add(out, e, "marginal_cost", "costs must be >= 0");
    if (!(g.startup_cost >= 0.0)) add(out, e, "startup_cost", "costs must be >= 0");
    if (!(g.shutdown_cost >= 0.0)) add(out, e, "shutdown_cost", "costs must be >= 0");
    max_cost = std::max(max_cost, g.marginal_cost);
  }

  ids.clear();
  for (const Demand& d : net.demands) {
    const std::string e = "demand " + std::to_string(d.id);
    if (!ids.insert(d.id).second) add(out, e, "id", "duplicate demand id");
    if (!known(d.bus)) add(out, e, "bus", "unknown bus " + std::to_string(d.bus));
    if (static_cast<int>(d.base_profile.size()) != net.horizon) {
      add(out, e, "base_profile", "base_profile length must equal horizon");
    }
    if (std::any_of(d.base_profile.begin(), d.base_profile.end(),
                    [](double v) { return !(v >= 0.0) || !std::isfinite(v); })) {
      add(out, e, "base_profile", "base_profile entries must be finite and >= 0");
    }
    if (!(d.voll > max_cost)) {
      add(out, e, "voll", "voll must exceed every generator marginal cost");
    }
  }
  return out;
}

PowerNetwork parse_network(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("network: malformed JSON: ") + e.what(),
                     line_of_byte(text, e.byte));
  }
  if (!root.is_object()) throw ParseError("network: top level must be an object");

  PowerNetwork net;
  net.horizon = field<int>(root, "horizon", "network");
  net.step_hours = field<double>(root, "step_hours", "network");

  for (const json& b : array_field(root, "buses")) {
    const std::string e = "bus " + (b.contains("id") ? b["id"].dump() : std::string("?"));
    Bus bus;
    bus.id = field<int>(b, "id", e);
    bus.name = field_or<std::string>(b, "name", e, "bus" + std::to_string(bus.id));
    bus.latitude = field<double>(b, "latitude", e);
    bus.longitude = field<double>(b, "longitude", e);
    net.buses.push_back(bus);
  }
  std::sort(net.buses.begin(), net.buses.end(),
            [](const Bus& a, const Bus& b) { return a.id < b.id; });

  auto bus_point = [&](int id) {
    if (id >= 1 && id <= net.num_buses() && net.buses[id - 1].id == id) {
      return GeoPoint{net.buses[id - 1].latitude, net.buses[id - 1].longitude};
    }
    return GeoPoint{};
  };

  for (const json& l : array_field(root, "lines")) {
    const std::string e = "line " + (l.contains("id") ? l["id"].dump() : std::string("?"));
    Line line;
    line.id = field<int>(l, "id", e);
    line.from_bus = field<int>(l, "from_bus", e);
    line.to_bus = field<int>(l, "to_bus", e);
    line.susceptance = field<double>(l, "susceptance", e);
    line.flow_min = field<double>(l, "flow_min", e);
    line.flow_max = field<double>(l, "flow_max", e);
    if (l.contains("endpoints")) {
      const auto pts = field<std::vector<std::vector<double>>>(l, "endpoints", e);
      if (pts.size() != 2 || pts[0].size() != 2 || pts[1].size() != 2) {
        throw ParseError(e + ": endpoints must be two [lat, lon] pairs");
      }
      line.endpoints = {GeoPoint{pts[0][0], pts[0][1]}, GeoPoint{pts[1][0], pts[1][1]}};
    } else {
      line.endpoints = {bus_point(line.from_bus), bus_point(line.to_bus)};
    }
    net.lines.push_back(line);
  }

  for (const json& g : array_field(root, "generators")) {
    const std::string e = "generator " + (g.contains("id") ? g["id"].dump() : std::string("?"));
    Generator gen;
    gen.id = field<int>(g, "id", e);
    gen.bus = field<int>(g, "bus", e);
    gen.p_min = field<double>(g, "p_min", e);
    gen.p_max = field<double>(g, "p_max", e);
    gen.ramp_down = field<double>(g, "ramp_down", e);
    gen.ramp_up = field<double>(g, "ramp_up", e);
    gen.min_up = field<int>(g, "min_up", e);
    gen.min_down = field<int>(g, "min_down", e);
    gen.marginal_cost = field<double>(g, "marginal_cost", e);
    gen.startup_cost = field<double>(g, "startup_cost", e);
    gen.shutdown_cost = field<double>(g, "shutdown_cost", e);
    gen.initially_on = field_or<bool>(g, "initially_on", e, false);
    net.generators.push_back(gen);
  }

  for (const json& d : array_field(root, "demands")) {
    const std::string e = "demand " + (d.contains("id") ? d["id"].dump() : std::string("?"));
    Demand dem;
    dem.id = field<int>(d, "id", e);
    dem.bus = field<int>(d, "bus", e);
    dem.voll = field_or<double>(d, "voll", e, 1000.0);
    dem.base_profile = field<std::vector<double>>(d, "base_profile", e);
    net.demands.push_back(dem);
  }

  const std::vector<Diagnostic> diags = validate_network(net);
  if (!diags.empty()) throw ValidationError(diags.front().message());
  return net;
}

PowerNetwork load_network(const std::filesystem::path& path) {
  return parse_network(read_text_file(path));
}

std::string network_to_json(const PowerNetwork& net) {
  json root;
  root["horizon"] = net.horizon;
  root["step_hours"] = net.step_hours;
  root["buses"] = json::array();
  for (const Bus& b : net.buses) {
    root["buses"].push_back(
        {{"id", b.id}, {"name", b.name}, {"latitude", b.latitude}, {"longitude", b.longitude}});
  }
  root["lines"] = json::array();
  for (const Line& l : net.lines) {
    root["lines"].push_back({{"id", l.id},
                             {"from_bus", l.from_bus},
                             {"to_bus", l.to_bus},
                             {"susceptance", l.susceptance},
                             {"flow_min", l.flow_min},
                             {"flow_max", l.flow_max},
                             {"endpoints",
                              {{l.endpoints[0].latitude, l.endpoints[0].longitude},
                               {l.endpoints[1].latitude, l.endpoints[1].longitude}}}});
  }
  root["generators"] = json::array();
  for (const Generator& g : net.generators) {
    root["generators"].push_back({{"id", g.id},
                                  {"bus", g.bus},
                                  {"p_min", g.p_min},
                                  {"p_max", g.p_max},
                                  {"ramp_down", g.ramp_down},
                                  {"ramp_up", g.ramp_up},
                                  {"min_up", g.min_up},
                                  {"min_down", g.min_down},
                                  {"marginal_cost", g.marginal_cost},
                                  {"startup_cost", g.startup_cost},
                                  {"shutdown_cost", g.shutdown_cost},
                                  {"initially_on", g.initially_on}});
  }
  root["demands"] = json::array();
  for (const Demand& d : net.demands) {
    root["demands"].push_back(
        {{"id", d.id}, {"bus", d.bus}, {"voll", d.voll}, {"base_profile", d.base_profile}});
  }
  return root.dump(2) + "\n";
}

void save_network(const PowerNetwork& net, const std::filesystem::path& path) {
  write_text_file(path, network_to_json(net));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace psps
