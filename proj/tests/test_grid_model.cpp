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

#include <filesystem>
#include <string>

#include "doctest.h"
#include "psps/error.hpp"
#include "psps/grid_model.hpp"
#include "support/fixtures.hpp"

using namespace psps;

namespace {

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("three-bus case loads with expected counts") {
  const PowerNetwork net = parse_network(testing::three_bus_json());
  CHECK(net.num_buses() == 3);
  CHECK(net.num_lines() == 2);
  CHECK(net.num_generators() == 2);
  CHECK(net.num_demands() == 1);
  CHECK(net.horizon == 3);
  CHECK(net.bus(2).name == "middle");
  CHECK_FALSE(net.generators[0].initially_on);
  // Endpoints default to the bus coordinates.
  CHECK(net.lines[0].endpoints[0] == GeoPoint{38.0, -120.0});
  CHECK(net.lines[0].endpoints[1] == GeoPoint{37.5, -120.0});
  CHECK(validate_network(net).empty());
}

TEST_CASE("unknown bus reference names the entity") {
  const std::string text =
      replace_once(testing::three_bus_json(), R"("id": 1, "bus": 1,)", R"("id": 1, "bus": 99,)");
  try {
    parse_network(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()) == "generator 1: unknown bus 99");
  }
}

TEST_CASE("malformed JSON reports a line number") {
  const std::string text = replace_once(testing::three_bus_json(), R"("horizon": 3,)",
                                        R"("horizon": 3,,)");
  try {
    parse_network(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("missing field is a parse error naming the entity") {
  const std::string text =
      replace_once(testing::three_bus_json(), R"("susceptance": 100.0,)", "");
  try {
    parse_network(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("validation diagnostics") {
  const PowerNetwork base = parse_network(testing::three_bus_json());

  SUBCASE("p_min above p_max") {
    PowerNetwork net = base;
    net.generators[1].p_min = 10.0;
    net.generators[1].p_max = 5.0;
    const auto d = validate_network(net);
    REQUIRE(d.size() == 1);
    CHECK(d[0].entity == "generator 2");
    CHECK(d[0].field == "p_max");
  }
  SUBCASE("min_up of zero") {
    PowerNetwork net = base;
    net.generators[0].min_up = 0;
    const auto d = validate_network(net);
    REQUIRE(d.size() == 1);
    CHECK(d[0].entity == "generator 1");
    CHECK(d[0].field == "min_up");
  }
  SUBCASE("self loop") {
    PowerNetwork net = base;
    net.lines[1].to_bus = 2;
    const auto d = validate_network(net);
    REQUIRE(d.size() == 1);
    CHECK(d[0].entity == "line 2");
  }
  SUBCASE("flow limits must bracket zero") {
    PowerNetwork net = base;
    net.lines[0].flow_min = 5.0;
    CHECK(validate_network(net).size() == 1);
  }
  SUBCASE("non-positive susceptance") {
    PowerNetwork net = base;
    net.lines[0].susceptance = 0.0;
    CHECK(validate_network(net).size() == 1);
  }
  SUBCASE("voll must dominate marginal cost") {
    PowerNetwork net = base;
    net.demands[0].voll = 30.0;
    const auto d = validate_network(net);
    REQUIRE(d.size() == 1);
    CHECK(d[0].field == "voll");
  }
  SUBCASE("profile length must match horizon") {
    PowerNetwork net = base;
    net.demands[0].base_profile.push_back(1.0);
    CHECK(validate_network(net).size() == 1);
  }
  SUBCASE("negative demand") {
    PowerNetwork net = base;
    net.demands[0].base_profile[1] = -1.0;
    CHECK(validate_network(net).size() == 1);
  }
  SUBCASE("latitude out of range") {
    PowerNetwork net = base;
    net.buses[0].latitude = 91.0;
    CHECK_FALSE(validate_network(net).empty());
  }
  SUBCASE("non-contiguous bus ids") {
    PowerNetwork net = base;
    net.buses[2].id = 7;
    CHECK_FALSE(validate_network(net).empty());
  }
  SUBCASE("zero horizon") {
    PowerNetwork net = base;
    net.horizon = 0;
    CHECK_FALSE(validate_network(net).empty());
  }
}

TEST_CASE("save then load is identity") {
  PowerNetwork net = parse_network(testing::three_bus_json());
  net.generators[1].initially_on = true;
  net.lines[0].endpoints[0] = GeoPoint{38.01, -120.02};
  CHECK(parse_network(network_to_json(net)) == net);

  const auto dir = std::filesystem::temp_directory_path() / "psps_grid_model_test";
  const auto path = dir / "nested" / "case.json";
  save_network(net, path);
  CHECK(load_network(path) == net);
  std::filesystem::remove_all(dir);
}

TEST_CASE("missing file is a parse error") {
  CHECK_THROWS_AS(load_network("/nonexistent/psps/case.json"), ParseError);
}
