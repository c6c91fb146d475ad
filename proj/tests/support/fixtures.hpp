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

#ifndef PSPS_TESTS_SUPPORT_FIXTURES_HPP_
#define PSPS_TESTS_SUPPORT_FIXTURES_HPP_

#include <string>

namespace psps::testing {

// Three buses on a line of longitude, two lines (1-2, 2-3), a cheap unit at
// bus 1 and an expensive one at bus 3, one load at bus 2. Horizon 3.
inline std::string three_bus_json() {
  return R"({
  "horizon": 3,
  "step_hours": 1.0,
  "buses": [
    {"id": 1, "name": "north", "latitude": 38.0, "longitude": -120.0},
    {"id": 2, "name": "middle", "latitude": 37.5, "longitude": -120.0},
    {"id": 3, "name": "south", "latitude": 37.0, "longitude": -120.0}
  ],
  "lines": [
    {"id": 1, "from_bus": 1, "to_bus": 2, "susceptance": 100.0,
     "flow_min": -80.0, "flow_max": 80.0},
    {"id": 2, "from_bus": 2, "to_bus": 3, "susceptance": 100.0,
     "flow_min": -80.0, "flow_max": 80.0}
  ],
  "generators": [
    {"id": 1, "bus": 1, "p_min": 10.0, "p_max": 100.0, "ramp_down": -60.0,
     "ramp_up": 60.0, "min_up": 1, "min_down": 1, "marginal_cost": 10.0,
     "startup_cost": 50.0, "shutdown_cost": 10.0},
    {"id": 2, "bus": 3, "p_min": 0.0, "p_max": 100.0, "ramp_down": -100.0,
     "ramp_up": 100.0, "min_up": 1, "min_down": 1, "marginal_cost": 40.0,
     "startup_cost": 20.0, "shutdown_cost": 5.0}
  ],
  "demands": [
    {"id": 1, "bus": 2, "voll": 1000.0, "base_profile": [40.0, 60.0, 50.0]}
  ]
})";
}

}  // namespace psps::testing

#endif  // PSPS_TESTS_SUPPORT_FIXTURES_HPP_
