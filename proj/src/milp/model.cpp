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

#include "psps/milp/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "psps/error.hpp"

namespace psps::milp {

VarId MilpModel::add_variable(std::string name, double lower, double upper,
                              VarKind kind) {
  vars_.push_back(Variable{std::move(name), lower, upper, kind, 0.0});
  return VarId{static_cast<int>(vars_.size()) - 1};
}

int MilpModel::add_constraint(std::string name, std::vector<Term> terms,
                              Sense sense, double rhs) {
  rows_.push_back(Constraint{std::move(name), std::move(terms), sense, rhs});
  return static_cast<int>(rows_.size()) - 1;
}

void MilpModel::set_bounds(VarId v, double lower, double upper) {
  vars_[v.index].lower = lower;
  vars_[v.index].upper = upper;
}

int MilpModel::num_binaries() const {
  return static_cast<int>(std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) {
    return v.kind == VarKind::kBinary;
  }));
}

void MilpModel::validate() const {
  std::unordered_set<std::string> names;
  names.reserve(vars_.size());
  for (const Variable& v : vars_) {
    if (!names.insert(v.name).second) {
      throw ValidationError("duplicate variable name '" + v.name + "'");
    }
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
      throw ValidationError("variable '" + v.name + "': invalid bounds");
    }
    if (v.kind == VarKind::kBinary && (v.lower < 0.0 || v.upper > 1.0)) {
      throw ValidationError("binary '" + v.name + "': bounds outside [0,1]");
    }
  }
  const int n = num_variables();
  for (const Constraint& c : rows_) {
    for (const Term& t : c.terms) {
      if (t.var.index < 0 || t.var.index >= n) {
        throw ValidationError("constraint '" + c.name +
                              "': unknown variable reference");
      }
      if (!std::isfinite(t.coef)) {
        throw ValidationError("constraint '" + c.name + "': non-finite coefficient");
      }
    }
    if (!std::isfinite(c.rhs)) {
      throw ValidationError("constraint '" + c.name + "': non-finite rhs");
    }
  }
}

double MilpModel::evaluate_objective(const std::vector<double>& x) const {
  double z = offset_;
  for (std::size_t j = 0; j < vars_.size(); ++j) z += vars_[j].objective * x[j];
  return z;
}

double MilpModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max(worst, vars_[j].lower - x[j]);
    worst = std::max(worst, x[j] - vars_[j].upper);
  }
  for (const Constraint& c : rows_) {
    double lhs = 0.0;
    for (const Term& t : c.terms) lhs += t.coef * x[t.var.index];
    switch (c.sense) {
      case Sense::kLessEqual: worst = std::max(worst, lhs - c.rhs); break;
      case Sense::kGreaterEqual: worst = std::max(worst, c.rhs - lhs); break;
      case Sense::kEqual: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
    }
  }
  return worst;
}

}  // namespace psps::milp
