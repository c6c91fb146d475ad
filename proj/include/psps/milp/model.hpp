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

#ifndef PSPS_MILP_MODEL_HPP_
#define PSPS_MILP_MODEL_HPP_

#include <limits>
#include <string>
#include <vector>

namespace psps::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { kContinuous, kBinary };
enum class Sense { kLessEqual, kEqual, kGreaterEqual };

struct VarId {
  int index = -1;
  bool valid() const { return index >= 0; }
  bool operator==(const VarId&) const = default;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarKind kind = VarKind::kContinuous;
  double objective = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

// A minimization MILP: variables with bounds, linear rows, a linear
// objective plus a constant offset.
class MilpModel {
 public:
  VarId add_variable(std::string name, double lower, double upper,
                     VarKind kind = VarKind::kContinuous);
  VarId add_binary(std::string name) {
    return add_variable(std::move(name), 0.0, 1.0, VarKind::kBinary);
  }
  // Returns the row index.
  int add_constraint(std::string name, std::vector<Term> terms, Sense sense,
                     double rhs);

  void set_objective(VarId v, double coef) { vars_[v.index].objective = coef; }
  void add_objective(VarId v, double coef) { vars_[v.index].objective += coef; }
  void set_objective_offset(double c) { offset_ = c; }
  void add_objective_offset(double c) { offset_ += c; }
  double objective_offset() const { return offset_; }

  void set_bounds(VarId v, double lower, double upper);
  void fix(VarId v, double value) { set_bounds(v, value, value); }

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  int num_binaries() const;
  const Variable& variable(int j) const { return vars_[j]; }
  const Variable& variable(VarId v) const { return vars_[v.index]; }
  const std::vector<Variable>& variables() const { return vars_; }
  const Constraint& constraint(int i) const { return rows_[i]; }
  const std::vector<Constraint>& constraints() const { return rows_; }

  // Throws ValidationError on unknown variable references, binary bounds
  // outside [0,1], inverted bounds, or duplicate names.
  void validate() const;

  // Objective value (including offset) at `x`.
  double evaluate_objective(const std::vector<double>& x) const;
  // Largest absolute violation of rows and bounds at `x`.
  double max_violation(const std::vector<double>& x) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  double offset_ = 0.0;
};

}  // namespace psps::milp

#endif  // PSPS_MILP_MODEL_HPP_
