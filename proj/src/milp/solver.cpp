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

#include "psps/milp/solver.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>
#include <queue>
#include <utility>

#include "psps/error.hpp"
#include "psps/milp/lp_solver.hpp"

namespace psps::milp {
namespace {

void check_size(const MilpModel& model) {
  if (model.num_variables() > kMaxVariables || model.num_constraints() > kMaxConstraints) {
    throw ModelTooLarge("model has " + std::to_string(model.num_variables()) +
                        " variables and " + std::to_string(model.num_constraints()) +
                        " constraints; engine cap is " + std::to_string(kMaxVariables) +
                        " / " + std::to_string(kMaxConstraints));
  }
}

struct Node {
  double bound = -kInf;
  long id = 0;
  // (binary column, fixed value) accumulated from the root.
  std::vector<std::pair<int, std::int8_t>> fixes;
  std::shared_ptr<const Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

// Dead ends a rounding dive may back out of before giving up.
constexpr int kMaxBacktracks = 50;

double abs_tol(double incumbent) {
  return 1e-9 * std::max(1.0, std::abs(incumbent));
}

double relative_gap(double incumbent, double bound) {
  if (!std::isfinite(incumbent)) return kInf;
  if (!std::isfinite(bound)) return kInf;
  return std::max(0.0, incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& model, const SolveLimits& limits,
                 const std::vector<double>& start)
      : model_(model), limits_(limits), lp_(model), start_point_(start) {
    for (int j = 0; j < model.num_variables(); ++j) {
      if (model.variable(j).kind == VarKind::kBinary) binaries_.push_back(j);
    }
    start_ = std::chrono::steady_clock::now();
  }

  MilpSolution run() {
    MilpSolution out;
    if (!start_point_.empty()) try_start();
    LpStatus root = lp_.solve();
    ++out.nodes;
    if (root == LpStatus::kInfeasible) return finish(out, SolveStatus::kInfeasible);
    if (root == LpStatus::kUnbounded) return finish(out, SolveStatus::kUnbounded);

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    expand(Node{}, open);
    dive({});

    while (!open.empty()) {
      const double bound = open.top().bound;
      if (std::isfinite(incumbent_) &&
          (bound >= incumbent_ - abs_tol(incumbent_) ||
           relative_gap(incumbent_, bound) <= limits_.relative_gap)) {
        break;
      }
      if (out.nodes >= limits_.max_nodes) {
        best_bound_ = bound;
        return finish(out, SolveStatus::kNodeLimit, false);
      }
      if (elapsed() > limits_.time_limit_seconds) {
        best_bound_ = bound;
        return finish(out, SolveStatus::kGapLimit, false);
      }
      Node node = open.top();
      open.pop();
      apply(node);
      ++out.nodes;
      if (lp_.solve() != LpStatus::kOptimal) continue;
      expand(node, open);
      if (out.nodes % (std::isfinite(incumbent_) ? 500 : 50) == 0) dive(node.fixes);
    }
    best_bound_ = open.empty() ? incumbent_ : std::min(incumbent_, open.top().bound);
    return finish(out, std::isfinite(incumbent_) ? SolveStatus::kOptimal
                                                 : SolveStatus::kInfeasible);
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  // Most fractional binary at the current LP point, lowest index on ties;
  // -1 when all binaries are integral.
  int branch_column(const std::vector<double>& x) const {
    int best = -1;
    double best_frac = kIntegralityTolerance;
    for (int j : binaries_) {
      const double f = std::abs(x[j] - std::round(x[j]));
      if (f > best_frac + 1e-12) {
        best_frac = f;
        best = j;
      }
    }
    return best;
  }

  // Records `x` as the incumbent if it improves. Binaries within the
  // integrality tolerance are snapped and, when that moves them, the
  // continuous part is re-solved so the stored point is exactly feasible.
  void consider(std::vector<double> x) {
    bool snapped = false;
    for (int j : binaries_) {
      const double r = std::round(x[j]);
      if (std::abs(x[j] - r) > 1e-9) snapped = true;
      x[j] = r;
    }
    if (snapped) {
      for (int j : binaries_) {
        lp_.set_bounds(j, x[j], x[j]);
        touched_.push_back(j);
      }
      if (lp_.solve() != LpStatus::kOptimal) return;
      x = lp_.solution();
      for (int j : binaries_) x[j] = std::round(x[j]);
    }
    const double z = model_.evaluate_objective(x);
    if (z < incumbent_) {
      incumbent_ = z;
      best_x_ = std::move(x);
    }
  }

  // Processes the LP optimum currently held by `lp_` for `node`: prunes,
  // records an incumbent, or pushes two children. Returns true if it
  // branched.
  bool expand(const Node& node,
              std::priority_queue<Node, std::vector<Node>, NodeOrder>& open) {
    const double z = lp_.objective();
    if (std::isfinite(incumbent_) && z >= incumbent_ - abs_tol(incumbent_)) return false;
    const std::vector<double> x = lp_.solution();
    const int j = branch_column(x);
    if (j < 0) {
      consider(x);
      return false;
    }
    auto basis = std::make_shared<const Basis>(lp_.basis());
    // Down child first so equal bounds are explored in a fixed order.
    for (std::int8_t v : {std::int8_t{0}, std::int8_t{1}}) {
      Node child;
      child.bound = z;
      child.id = next_id_++;
      child.fixes = node.fixes;
      child.fixes.emplace_back(j, v);
      child.basis = basis;
      open.push(std::move(child));
    }
    return true;
  }

  void apply(const Node& node) {
    for (int j : touched_) {
      const Variable& v = model_.variable(j);
      lp_.set_bounds(j, v.lower, v.upper);
    }
    touched_.clear();
    for (auto [j, v] : node.fixes) {
      lp_.set_bounds(j, v, v);
      touched_.push_back(j);
    }
    if (node.basis) lp_.set_basis(*node.basis);
  }

  void try_start() {
    for (int j : binaries_) {
      const double v = std::round(start_point_[j]);
      lp_.set_bounds(j, v, v);
      touched_.push_back(j);
    }
    if (lp_.solve() == LpStatus::kOptimal) consider(lp_.solution());
    apply(Node{});
  }

  // Rounding dive from a node: repeatedly fixes the least fractional
  // binary to its nearest value, trying the other value when that is
  // infeasible and backtracking a bounded number of times when both are.
  // Only used to find incumbents.
  void dive(const std::vector<std::pair<int, std::int8_t>>& fixes) {
    Node node;
    node.fixes = fixes;
    apply(node);
    bool ok = lp_.solve() == LpStatus::kOptimal;
    if (!ok) return;
    struct Decision {
      int column;
      std::int8_t value;
      bool flipped;
    };
    std::vector<Decision> path;
    int backtracks = 0;
    const int max_steps = 4 * static_cast<int>(binaries_.size()) + 8;
    for (int step = 0; step < max_steps; ++step) {
      if (elapsed() > limits_.time_limit_seconds) return;
      if (ok && std::isfinite(incumbent_) &&
          lp_.objective() >= incumbent_ - abs_tol(incumbent_)) {
        ok = false;
      }
      if (ok) {
        const std::vector<double> x = lp_.solution();
        int pick = -1;
        double pick_frac = kInf;
        for (int j : binaries_) {
          const double f = std::abs(x[j] - std::round(x[j]));
          if (f > kIntegralityTolerance && f < pick_frac - 1e-12) {
            pick_frac = f;
            pick = j;
          }
        }
        if (pick < 0) {
          consider(x);
          return;
        }
        const std::int8_t v = static_cast<std::int8_t>(std::round(x[pick]));
        lp_.set_bounds(pick, v, v);
        touched_.push_back(pick);
        path.push_back({pick, v, false});
        ok = lp_.solve() == LpStatus::kOptimal;
        if (ok) continue;
      }
      // Undo decisions whose alternative has been tried, then flip one.
      while (!path.empty() && path.back().flipped) {
        const Variable& var = model_.variable(path.back().column);
        lp_.set_bounds(path.back().column, var.lower, var.upper);
        path.pop_back();
      }
      if (path.empty() || ++backtracks > kMaxBacktracks) return;
      Decision& last = path.back();
      last.value = static_cast<std::int8_t>(1 - last.value);
      last.flipped = true;
      lp_.set_bounds(last.column, last.value, last.value);
      ok = lp_.solve() == LpStatus::kOptimal;
    }
  }

  MilpSolution finish(MilpSolution& out, SolveStatus status, bool proven = true) {
    out.lp_iterations = lp_.iterations();
    if (status == SolveStatus::kUnbounded) {
      out.status = status;
      out.objective = -kInf;
      return out;
    }
    if (status == SolveStatus::kInfeasible && !std::isfinite(incumbent_)) {
      out.status = status;
      return out;
    }
    out.status = status;
    if (std::isfinite(incumbent_)) {
      out.objective = incumbent_;
      out.values = best_x_;
    }
    if (proven && status == SolveStatus::kOptimal && !std::isfinite(best_bound_)) {
      best_bound_ = incumbent_;
    }
    out.best_bound = best_bound_;
    out.gap = relative_gap(incumbent_, best_bound_);
    return out;
  }

  const MilpModel& model_;
  SolveLimits limits_;
  LpSolver lp_;
  std::vector<int> binaries_;
  std::vector<double> start_point_;
  std::vector<int> touched_;
  double incumbent_ = kInf;
  std::vector<double> best_x_;
  double best_bound_ = -kInf;
  long next_id_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "Optimal";
    case SolveStatus::kInfeasible: return "Infeasible";
    case SolveStatus::kUnbounded: return "Unbounded";
    case SolveStatus::kGapLimit: return "GapLimit";
    case SolveStatus::kNodeLimit: return "NodeLimit";
  }
  return "Unknown";
}

MilpSolution solve_lp(const MilpModel& model) {
  model.validate();
  check_size(model);
  LpSolver lp(model);
  MilpSolution out;
  out.nodes = 1;
  switch (lp.solve()) {
    case LpStatus::kOptimal:
      out.status = SolveStatus::kOptimal;
      out.values = lp.solution();
      out.objective = lp.objective();
      out.best_bound = out.objective;
      out.gap = 0.0;
      break;
    case LpStatus::kInfeasible: out.status = SolveStatus::kInfeasible; break;
    case LpStatus::kUnbounded:
      out.status = SolveStatus::kUnbounded;
      out.objective = -kInf;
      break;
  }
  out.lp_iterations = lp.iterations();
  return out;
}

MilpSolution solve_milp(const MilpModel& model, const SolveLimits& limits,
                        const std::vector<double>& start) {
  model.validate();
  check_size(model);
  if (!start.empty() && static_cast<int>(start.size()) != model.num_variables()) {
    throw ValidationError("start vector has " + std::to_string(start.size()) +
                       " values for " + std::to_string(model.num_variables()) + " variables");
  }
  if (model.num_binaries() == 0) return solve_lp(model);
  return BranchAndBound(model, limits, start).run();
}

namespace {

std::string lp_name(const std::string& s, const char* prefix, int index) {
  std::string out;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
                     c == '(' || c == ')' || c == ',' || c == '[' || c == ']';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0])) || out[0] == '.') {
    out = prefix + std::to_string(index) + (out.empty() ? "" : "_" + out);
  }
  return out;
}

void write_terms(std::ostream& out, const std::vector<std::pair<double, std::string>>& terms) {
  if (terms.empty()) {
    out << " 0";
    return;
  }
  int k = 0;
  for (const auto& [c, name] : terms) {
    out << (c < 0 ? " - " : (k == 0 ? " " : " + ")) << std::abs(c) << ' ' << name;
    if (++k % 6 == 0) out << "\n  ";
  }
}

}  // namespace

void write_lp_format(const MilpModel& model, std::ostream& out) {
  out.precision(17);
  std::vector<std::string> names(model.num_variables());
  for (int j = 0; j < model.num_variables(); ++j) {
    names[j] = lp_name(model.variable(j).name, "x", j);
  }
  out << "\\ objective offset " << model.objective_offset() << "\nMinimize\n obj:";
  std::vector<std::pair<double, std::string>> terms;
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.variable(j).objective != 0.0) terms.emplace_back(model.variable(j).objective, names[j]);
  }
  write_terms(out, terms);
  out << "\nSubject To\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const Constraint& c = model.constraint(i);
    out << ' ' << lp_name(c.name, "c", i) << ':';
    terms.clear();
    for (const Term& t : c.terms) terms.emplace_back(t.coef, names[t.var.index]);
    write_terms(out, terms);
    switch (c.sense) {
      case Sense::kLessEqual: out << " <= "; break;
      case Sense::kGreaterEqual: out << " >= "; break;
      case Sense::kEqual: out << " = "; break;
    }
    out << c.rhs << '\n';
  }
  out << "Bounds\n";
  for (int j = 0; j < model.num_variables(); ++j) {
    const Variable& v = model.variable(j);
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << ' ' << names[j] << " free\n";
    } else if (v.lower == v.upper) {
      out << ' ' << names[j] << " = " << v.lower << '\n';
    } else {
      out << ' ';
      if (std::isinf(v.lower)) {
        out << "-inf";
      } else {
        out << v.lower;
      }
      out << " <= " << names[j] << " <= ";
      if (std::isinf(v.upper)) {
        out << "+inf";
      } else {
        out << v.upper;
      }
      out << '\n';
    }
  }
  out << "Binaries\n";
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.variable(j).kind == VarKind::kBinary) out << ' ' << names[j] << '\n';
  }
  out << "End\n";
}

}  // namespace psps::milp
