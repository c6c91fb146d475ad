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

#ifndef PSPS_MILP_SOLVER_HPP_
#define PSPS_MILP_SOLVER_HPP_

#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "psps/milp/model.hpp"

namespace psps::milp {

// Size cap of the embedded engine. Larger models raise ModelTooLarge.
inline constexpr int kMaxVariables = 250000;
inline constexpr int kMaxConstraints = 250000;

inline constexpr double kFeasibilityTolerance = 1e-8;
inline constexpr double kIntegralityTolerance = 1e-6;

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kGapLimit, kNodeLimit };

const char* to_string(SolveStatus s);

struct SolveLimits {
  double relative_gap = 1e-6;
  long max_nodes = 1000000;
  double time_limit_seconds = std::numeric_limits<double>::infinity();
};

struct MilpSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> values;
  // Best proven lower bound and the relative gap to the incumbent.
  double best_bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  long nodes = 0;
  long lp_iterations = 0;

  // True when `values` holds a feasible assignment (Optimal, or a limit
  // status that carries an incumbent).
  bool has_solution() const { return !values.empty(); }
  double value(VarId v) const { return values[v.index]; }
};

// Solves the LP relaxation (binaries treated as [0,1] continuous).
MilpSolution solve_lp(const MilpModel& model);

// Best-bound branch and bound over the binaries. NodeLimit is returned
// when `max_nodes` is exhausted and GapLimit when the time limit stops
// the search with the gap still open; both carry the incumbent if any.
// A non-empty `start` (one value per variable) seeds the incumbent: its
// binaries are rounded and fixed and the continuous part is re-solved.
MilpSolution solve_milp(const MilpModel& model, const SolveLimits& limits = {},
                        const std::vector<double>& start = {});

// Backend seam so an external solver can stand in for the embedded one.
class MilpBackend {
 public:
  virtual ~MilpBackend() = default;
  virtual MilpSolution solve(const MilpModel& model, const SolveLimits& limits,
                             const std::vector<double>& start = {}) = 0;
  virtual std::string name() const = 0;
};

class EmbeddedBackend : public MilpBackend {
 public:
  MilpSolution solve(const MilpModel& model, const SolveLimits& limits,
                     const std::vector<double>& start = {}) override {
    return solve_milp(model, limits, start);
  }
  std::string name() const override { return "embedded"; }
};

// Writes the model in CPLEX LP text format.
void write_lp_format(const MilpModel& model, std::ostream& out);

}  // namespace psps::milp

#endif  // PSPS_MILP_SOLVER_HPP_
