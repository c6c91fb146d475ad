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

#ifndef PSPS_GRID_MODEL_HPP_
#define PSPS_GRID_MODEL_HPP_

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace psps {

struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;
  bool operator==(const GeoPoint&) const = default;
};

struct Bus {
  int id = 0;
  std::string name;
  double latitude = 0.0;
  double longitude = 0.0;
  bool operator==(const Bus&) const = default;
};

// Power in MW throughout; susceptance absorbs the per-unit base so that
// flow = susceptance * angle difference is in MW.
struct Line {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double susceptance = 0.0;
  double flow_min = 0.0;
  double flow_max = 0.0;
  std::array<GeoPoint, 2> endpoints{};
  bool operator==(const Line&) const = default;
};

struct Generator {
  int id = 0;
  int bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  // Signed per-step limits on the change of p - p_max * z.
  double ramp_down = 0.0;
  double ramp_up = 0.0;
  int min_up = 1;
  int min_down = 1;
  double marginal_cost = 0.0;
  double startup_cost = 0.0;
  double shutdown_cost = 0.0;
  bool initially_on = false;
  bool operator==(const Generator&) const = default;
};

struct Demand {
  int id = 0;
  int bus = 0;
  double voll = 1000.0;
  std::vector<double> base_profile;
  bool operator==(const Demand&) const = default;
};

struct PowerNetwork {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<Demand> demands;
  int horizon = 0;
  double step_hours = 1.0;

  int num_buses() const { return static_cast<int>(buses.size()); }
  int num_lines() const { return static_cast<int>(lines.size()); }
  int num_generators() const { return static_cast<int>(generators.size()); }
  int num_demands() const { return static_cast<int>(demands.size()); }
  // Buses are stored in id order with ids 1..N, so this is id - 1.
  int bus_index(int bus_id) const { return bus_id - 1; }
  const Bus& bus(int bus_id) const { return buses[bus_id - 1]; }

  bool operator==(const PowerNetwork&) const = default;
};

struct Diagnostic {
  std::string entity;  // e.g. "generator 3"
  std::string field;
  std::string rule;

  std::string message() const { return entity + ": " + rule; }
};

// Checks every invariant of the network types. Empty iff valid.
std::vector<Diagnostic> validate_network(const PowerNetwork& net);

// Parses a network from JSON text. Throws ParseError (with line number
// when the text is malformed) or ValidationError naming the entity.
PowerNetwork parse_network(const std::string& text);
PowerNetwork load_network(const std::filesystem::path& path);

std::string network_to_json(const PowerNetwork& net);
void save_network(const PowerNetwork& net, const std::filesystem::path& path);

// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
// Creates parent directories; throws IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace psps

#endif  // PSPS_GRID_MODEL_HPP_
