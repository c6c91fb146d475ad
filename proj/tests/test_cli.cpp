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

// Runs the psps executable end to end on the bundled three-bus dataset.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kTool = PSPS_CLI_PATH;
const fs::path kToy = fs::path(PSPS_DATA_DIR) / "toy3";

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("psps_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Runs the tool with the given arguments and returns its exit code.
int psps(const std::string& args, const fs::path& log) {
  const std::string cmd = kTool.string() + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

fs::path copy_config(const fs::path& dir, const std::function<void(json&)>& edit) {
  json j = json::parse(slurp(kToy / "config.json"));
  edit(j);
  const fs::path path = dir / "config.json";
  std::ofstream(path) << j.dump(2);
  return path;
}

// Absolute paths for every file the toy config names, so a copy works
// from another directory.
void absolutize(json& j) {
  auto fix = [](json& v) { v = (kToy / v.get<std::string>()).string(); };
  fix(j["network"]);
  fix(j["risk"]["wfpi"]["reliability_table"]);
  fix(j["risk"]["wfpi"]["day_ahead"]["raster"]);
  fix(j["risk"]["wfpi"]["real_time"]["raster"]);
  fix(j["scenarios"]["history_demand"]);
  fix(j["scenarios"]["history_risk"]);
  fix(j["real_time"]["realized_demand"]);
}

}  // namespace

TEST_CASE("run writes every artifact and reruns are byte-identical") {
  const fs::path dir = scratch("run");
  const std::string config = "--config " + (kToy / "config.json").string();
  REQUIRE(psps(config + " --out " + (dir / "a").string() + " run", dir / "a.log") == 0);
  REQUIRE(psps(config + " --out " + (dir / "b").string() + " run", dir / "b.log") == 0);
  const json manifest = json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(manifest["command"] == "run");
  CHECK(manifest["seed"] == 11);
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  CHECK(!manifest["version"].get<std::string>().empty());
  for (const char* name : {"plan.json", "commitments.csv", "energizations.csv", "dispatch.csv",
                           "costs.json", "da_summary.json", "rt_report.json", "rt_scenarios.csv",
                           "manifest.json"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(dir / "a" / name));
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
}

TEST_CASE("the seed enters the config hash") {
  const fs::path dir = scratch("seed");
  const std::string config = "--config " + (kToy / "config.json").string();
  REQUIRE(psps(config + " --out " + (dir / "a").string() + " solve-da", dir / "a.log") == 0);
  REQUIRE(psps(config + " --seed 12 --out " + (dir / "b").string() + " solve-da", dir / "b.log") ==
          0);
  const json a = json::parse(slurp(dir / "a" / "manifest.json"));
  const json b = json::parse(slurp(dir / "b" / "manifest.json"));
  CHECK(a["config_hash"] != b["config_hash"]);
  CHECK(b["seed"] == 12);
}

TEST_CASE("simulate-rt reads a saved plan") {
  const fs::path dir = scratch("simulate");
  const std::string config = "--config " + (kToy / "config.json").string();
  REQUIRE(psps(config + " --out " + dir.string() + " solve-da", dir / "da.log") == 0);
  REQUIRE(psps(config + " --out " + (dir / "rt").string() + " --samples 40 simulate-rt --plan " +
                   (dir / "plan.json").string(),
               dir / "rt.log") == 0);
  const json report = json::parse(slurp(dir / "rt" / "rt_report.json"));
  CHECK(report["samples"] == 40);
}

TEST_CASE("missing raster is an I/O failure in the risk stage") {
  const fs::path dir = scratch("raster");
  const fs::path config = copy_config(dir, [](json& j) {
    absolutize(j);
    j["risk"]["wfpi"]["day_ahead"]["raster"] = "/nonexistent/wfpi.asc";
  });
  CHECK(psps("--config " + config.string() + " --out " + (dir / "out").string() + " solve-da",
             dir / "log") == 5);
  const json err = json::parse(slurp(dir / "out" / "error.json"));
  CHECK(err["stage"] == "risk-pipeline");
  CHECK(err["error"] == "ParseError");
  CHECK(err["exit_code"] == 5);
}

TEST_CASE("config errors and infeasible budgets have their own exit codes") {
  const fs::path dir = scratch("codes");
  const fs::path bad = copy_config(dir, [](json& j) { j["unexpected"] = true; });
  CHECK(psps("--config " + bad.string() + " solve-da", dir / "bad.log") == 2);
  CHECK(slurp(dir / "bad.log").find("\"stage\":\"config\"") != std::string::npos);

  const fs::path tight = dir / "tight";
  fs::create_directories(tight);
  const fs::path infeasible = copy_config(tight, [](json& j) {
    absolutize(j);
    j["budget"]["pi_tol"] = 1e-12;
  });
  CHECK(psps("--config " + infeasible.string() + " --out " + (dir / "out").string() + " solve-da",
             dir / "tight.log") == 3);
  const json err = json::parse(slurp(dir / "out" / "error.json"));
  CHECK(err["stage"] == "psps-formulation");
  CHECK(psps("--config " + (kToy / "config.json").string() + " frobnicate", dir / "cmd.log") == 2);
}

TEST_CASE("sweep writes one directory per point and a summary") {
  const fs::path dir = scratch("sweep");
  REQUIRE(psps("--config " + (kToy / "config.json").string() + " --out " + dir.string() +
                   " --samples 30 sweep",
               dir / "log") == 0);
  for (const char* point : {"point_00", "point_01", "point_02"}) {
    CAPTURE(point);
    CHECK(fs::exists(dir / point / "plan.json"));
    CHECK(fs::exists(dir / point / "rt_report.json"));
    CHECK(fs::exists(dir / point / "point.json"));
  }
  std::istringstream summary(slurp(dir / "summary.csv"));
  std::string line;
  std::getline(summary, line);
  CHECK(line.rfind("point,pi_tol,", 0) == 0);
  int rows = 0;
  double previous = 1e300;
  while (std::getline(summary, line)) {
    ++rows;
    // Looser tolerances never raise the optimal day-ahead cost.
    std::istringstream fields(line);
    std::string f;
    for (int i = 0; i < 6; ++i) std::getline(fields, f, ',');
    const double da = std::stod(f);
    CHECK(da <= previous + 1e-6);
    previous = da;
  }
  CHECK(rows == 3);
}

TEST_CASE("analyses write their reports") {
  const fs::path dir = scratch("analyze");
  const std::string config = "--config " + (kToy / "config.json").string();
  REQUIRE(psps(config + " --out " + (dir / "c").string() + " analyze clusters", dir / "c.log") ==
          0);
  CHECK(fs::exists(dir / "c" / "clusters.json"));
  CHECK(fs::exists(dir / "c" / "owip.csv"));
  REQUIRE(psps(config + " --out " + (dir / "m").string() + " analyze mae", dir / "m.log") == 0);
  const json mae = json::parse(slurp(dir / "m" / "mae.json"));
  CHECK(mae["buses"].size() == 3);
  REQUIRE(psps(config + " --out " + (dir / "v").string() + " analyze vss", dir / "v.log") == 0);
  const json vss = json::parse(slurp(dir / "v" / "vss.json"));
  CHECK(vss["ordered"] == true);
  REQUIRE(psps(config + " --out " + (dir / "r").string() + " risk build", dir / "r.log") == 0);
  const json risk = json::parse(slurp(dir / "r" / "risk_summary.json"));
  CHECK(risk["risky_lines"] == 2);
}
