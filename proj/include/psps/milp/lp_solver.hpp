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

#ifndef PSPS_MILP_LP_SOLVER_HPP_
#define PSPS_MILP_LP_SOLVER_HPP_

#include <cstdint>
#include <memory>
#include <vector>

#include "psps/milp/model.hpp"

namespace psps::milp {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpOptions {
  double primal_tolerance = 1e-9;
  // Applied to costs scaled so the largest |c_j| is 1.
  double dual_tolerance = 1e-9;
  double pivot_tolerance = 1e-9;
  int refactor_interval = 100;
  // 0 selects 50 * (rows + columns), at least 20000.
  long max_iterations = 0;
};

// Per-variable basis status for the structural columns followed by the
// row logicals. Opaque to callers; used to warm start.
struct Basis {
  std::vector<std::int8_t> status;
};

// Bounded revised primal simplex over the rows of a MilpModel with
// integrality ignored. Each row a^T x is paired with a logical w so that
// a^T x - w = 0 and the row sense becomes bounds on w.
//
// The basis factorization is a sparse LU refreshed every
// `refactor_interval` pivots, with product-form updates in between.
// Bounds can be changed between solves; the next solve starts from the
// current basis.
class LpSolver {
 public:
  explicit LpSolver(const MilpModel& model, LpOptions options = {});
  ~LpSolver();
  LpSolver(const LpSolver&) = delete;
  LpSolver& operator=(const LpSolver&) = delete;

  int num_columns() const;
  int num_rows() const;

  void set_bounds(int column, double lower, double upper);
  double lower(int column) const;
  double upper(int column) const;

  // Throws NumericalFailure if the iteration guard is exhausted.
  LpStatus solve();

  // Valid after kOptimal. Includes the model's objective offset.
  double objective() const;
  // Structural column values.
  std::vector<double> solution() const;
  double value(int column) const;

  Basis basis() const;
  // Falls back to the all-logical basis when `b` is unusable.
  void set_basis(const Basis& b);

  long iterations() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace psps::milp

#endif  // PSPS_MILP_LP_SOLVER_HPP_
