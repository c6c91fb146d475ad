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

// Bounded revised simplex on the scaled problem A x - s = 0, lo <= (x, s)
// <= up. Each solve runs the dual simplex from a dual feasible start
// (boxed columns flipped to the matching bound, other columns cost-shifted,
// plus a small deterministic cost perturbation against degeneracy), then
// removes the shifts and finishes with primal phase 2. The basis inverse
// is an LU factorization with product-form updates.

#include "psps/milp/lp_solver.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>

#include "psps/error.hpp"

namespace psps::milp {
namespace {

enum : std::int8_t { kBasic = 0, kAtLower = 1, kAtUpper = 2, kFree = 3 };

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct Eta {
  int row = 0;
  double pivot = 1.0;
  std::vector<int> index;
  std::vector<double> value;
};

double pow2_round(double f) { return std::exp2(std::round(std::log2(f))); }

// Deterministic value in [0, 1) from a column index.
double unit_hash(std::uint64_t j) {
  j += 0x9e3779b97f4a7c15ULL;
  j = (j ^ (j >> 30)) * 0xbf58476d1ce4e5b9ULL;
  j = (j ^ (j >> 27)) * 0x94d049bb133111ebULL;
  j ^= j >> 31;
  return static_cast<double>(j >> 11) * 0x1.0p-53;
}

struct Candidate {
  int j;
  double ratio;
  double abs_alpha;
};

}  // namespace

struct LpSolver::Impl {
  LpOptions opt;
  int n = 0;
  int m = 0;
  // Scaled constraint matrix, by column and by row.
  std::vector<int> col_start, col_row;
  std::vector<double> col_val;
  std::vector<int> row_start, row_col;
  std::vector<double> row_val;
  std::vector<double> col_scale, row_scale;

  std::vector<double> orig_lo, orig_up, orig_cost;
  double offset = 0.0;

  // Scaled working data over structurals then logicals.
  std::vector<double> lo, up, cost, work_cost, d, x;
  std::vector<std::int8_t> st;
  std::vector<int> head;
  std::vector<double> dse;  // dual steepest-edge weights per row

  mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  std::vector<Eta> etas;
  bool factored = false;
  bool fresh = false;
  long total_iterations = 0;
  long iter = 0;
  long max_iter = 0;

  Vec work_rho, work_col, work_tau, work_flip;
  std::vector<double> alpha_row;

  Impl(const MilpModel& model, LpOptions options) : opt(options) {
    n = model.num_variables();
    m = model.num_constraints();
    orig_lo.resize(n);
    orig_up.resize(n);
    orig_cost.resize(n);
    for (int j = 0; j < n; ++j) {
      const Variable& v = model.variable(j);
      orig_lo[j] = v.lower;
      orig_up[j] = v.upper;
      orig_cost[j] = v.objective;
    }
    offset = model.objective_offset();

    struct Entry {
      int i, j;
      double v;
    };
    std::vector<Entry> entries;
    for (int i = 0; i < m; ++i) {
      for (const Term& t : model.constraint(i).terms) {
        if (t.coef != 0.0) entries.push_back({i, t.var.index, t.coef});
      }
    }
    compute_scaling(entries);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(entries.size());
    for (const Entry& e : entries) trip.emplace_back(e.i, e.j, e.v * row_scale[e.i] * col_scale[e.j]);
    SpMat a(m, n);
    a.setFromTriplets(trip.begin(), trip.end());
    a.prune(0.0);
    a.makeCompressed();
    col_start.assign(a.outerIndexPtr(), a.outerIndexPtr() + n + 1);
    col_row.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
    col_val.assign(a.valuePtr(), a.valuePtr() + a.nonZeros());
    Eigen::SparseMatrix<double, Eigen::RowMajor> ar = a;
    ar.makeCompressed();
    row_start.assign(ar.outerIndexPtr(), ar.outerIndexPtr() + m + 1);
    row_col.assign(ar.innerIndexPtr(), ar.innerIndexPtr() + ar.nonZeros());
    row_val.assign(ar.valuePtr(), ar.valuePtr() + ar.nonZeros());

    lo.assign(n + m, 0.0);
    up.assign(n + m, 0.0);
    cost.assign(n + m, 0.0);
    double cmax = 0.0;
    for (int j = 0; j < n; ++j) {
      lo[j] = orig_lo[j] / col_scale[j];
      up[j] = orig_up[j] / col_scale[j];
      cost[j] = orig_cost[j] * col_scale[j];
      cmax = std::max(cmax, std::abs(cost[j]));
    }
    if (cmax > 0.0) {
      for (int j = 0; j < n; ++j) cost[j] /= cmax;
    }
    for (int i = 0; i < m; ++i) {
      const Constraint& c = model.constraint(i);
      const double r = c.rhs * row_scale[i];
      switch (c.sense) {
        case Sense::kLessEqual: lo[n + i] = -kInf; up[n + i] = r; break;
        case Sense::kGreaterEqual: lo[n + i] = r; up[n + i] = kInf; break;
        case Sense::kEqual: lo[n + i] = r; up[n + i] = r; break;
      }
    }
    work_cost = cost;
    d.assign(n + m, 0.0);
    x.assign(n + m, 0.0);
    st.assign(n + m, kAtLower);
    alpha_row.assign(n + m, 0.0);
    work_rho.resize(m);
    work_col.resize(m);
    work_tau.resize(m);
    work_flip.resize(m);
    slack_basis();
  }

  // Geometric-mean row and column scaling, rounded to powers of two.
  template <class Entry>
  void compute_scaling(const std::vector<Entry>& entries) {
    row_scale.assign(m, 1.0);
    col_scale.assign(n, 1.0);
    for (int pass = 0; pass < 4; ++pass) {
      std::vector<double> rmin(m, kInf), rmax(m, 0.0);
      for (const Entry& e : entries) {
        const double v = std::abs(e.v) * row_scale[e.i] * col_scale[e.j];
        rmin[e.i] = std::min(rmin[e.i], v);
        rmax[e.i] = std::max(rmax[e.i], v);
      }
      for (int i = 0; i < m; ++i) {
        if (rmax[i] > 0.0) row_scale[i] /= std::sqrt(rmin[i] * rmax[i]);
      }
      std::vector<double> cmin(n, kInf), cmax(n, 0.0);
      for (const Entry& e : entries) {
        const double v = std::abs(e.v) * row_scale[e.i] * col_scale[e.j];
        cmin[e.j] = std::min(cmin[e.j], v);
        cmax[e.j] = std::max(cmax[e.j], v);
      }
      for (int j = 0; j < n; ++j) {
        if (cmax[j] > 0.0) col_scale[j] /= std::sqrt(cmin[j] * cmax[j]);
      }
    }
    for (double& r : row_scale) r = pow2_round(r);
    for (double& c : col_scale) c = pow2_round(c);
  }

  bool is_fixed(int j) const { return lo[j] == up[j]; }

  void place_nonbasic(int j) {
    if (st[j] == kAtUpper && std::isfinite(up[j])) {
      x[j] = up[j];
    } else if (std::isfinite(lo[j])) {
      st[j] = kAtLower;
      x[j] = lo[j];
    } else if (std::isfinite(up[j])) {
      st[j] = kAtUpper;
      x[j] = up[j];
    } else {
      st[j] = kFree;
      x[j] = 0.0;
    }
  }

  void slack_basis() {
    head.resize(m);
    for (int j = 0; j < n; ++j) {
      st[j] = kAtLower;
      place_nonbasic(j);
    }
    for (int r = 0; r < m; ++r) {
      head[r] = n + r;
      st[n + r] = kBasic;
    }
    dse.assign(m, 1.0);
    factored = false;
  }

  bool refactor() {
    etas.clear();
    fresh = true;
    if (m == 0) {
      factored = true;
      return true;
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m) * 3);
    for (int r = 0; r < m; ++r) {
      const int j = head[r];
      if (j < n) {
        for (int k = col_start[j]; k < col_start[j + 1]; ++k) trip.emplace_back(col_row[k], r, col_val[k]);
      } else {
        trip.emplace_back(j - n, r, -1.0);
      }
    }
    SpMat b(m, m);
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    lu.analyzePattern(b);
    lu.factorize(b);
    factored = lu.info() == Eigen::Success;
    return factored;
  }

  void ensure_factored() {
    if (refactor()) return;
    slack_basis();
    if (!refactor()) throw NumericalFailure("basis factorization failed");
  }

  void ftran(Vec& v) const {
    if (m == 0) return;
    v = lu.solve(v);
    for (const Eta& e : etas) {
      const double yr = v[e.row] / e.pivot;
      v[e.row] = yr;
      if (yr == 0.0) continue;
      for (std::size_t k = 0; k < e.index.size(); ++k) v[e.index[k]] -= e.value[k] * yr;
    }
  }

  void btran(Vec& v) const {
    if (m == 0) return;
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double s = v[it->row];
      for (std::size_t k = 0; k < it->index.size(); ++k) s -= it->value[k] * v[it->index[k]];
      v[it->row] = s / it->pivot;
    }
    Vec w = lu.transpose().solve(v);
    v = w;
  }

  void load_column(int j, Vec& v) const {
    v.setZero();
    if (j >= n) {
      v[j - n] = -1.0;
      return;
    }
    for (int k = col_start[j]; k < col_start[j + 1]; ++k) v[col_row[k]] = col_val[k];
  }

  double column_dot(int j, const Vec& y) const {
    if (j >= n) return -y[j - n];
    double s = 0.0;
    for (int k = col_start[j]; k < col_start[j + 1]; ++k) s += col_val[k] * y[col_row[k]];
    return s;
  }

  void compute_primal() {
    if (m == 0) return;
    Vec rhs = Vec::Zero(m);
    for (int j = 0; j < n + m; ++j) {
      if (st[j] == kBasic || x[j] == 0.0) continue;
      if (j < n) {
        for (int k = col_start[j]; k < col_start[j + 1]; ++k) rhs[col_row[k]] -= col_val[k] * x[j];
      } else {
        rhs[j - n] += x[j];
      }
    }
    ftran(rhs);
    for (int r = 0; r < m; ++r) x[head[r]] = rhs[r];
  }

  void compute_duals() {
    Vec y(m);
    for (int r = 0; r < m; ++r) y[r] = work_cost[head[r]];
    btran(y);
    for (int j = 0; j < n + m; ++j) d[j] = st[j] == kBasic ? 0.0 : work_cost[j] - column_dot(j, y);
  }

  double primal_infeasibility(int k) const {
    if (x[k] < lo[k]) return lo[k] - x[k];
    if (x[k] > up[k]) return x[k] - up[k];
    return 0.0;
  }

  // Flips boxed columns to the bound their reduced cost prefers and shifts
  // the cost of any other dual infeasible column. Returns true if a flip
  // moved x.
  bool make_dual_feasible() {
    const double dtol = opt.dual_tolerance;
    bool moved = false;
    for (int j = 0; j < n + m; ++j) {
      if (st[j] == kBasic || is_fixed(j)) continue;
      const bool boxed = std::isfinite(lo[j]) && std::isfinite(up[j]);
      if (st[j] == kAtLower && d[j] < -dtol) {
        if (boxed) {
          st[j] = kAtUpper;
          x[j] = up[j];
          moved = true;
        } else {
          work_cost[j] -= d[j];
          d[j] = 0.0;
        }
      } else if (st[j] == kAtUpper && d[j] > dtol) {
        if (boxed) {
          st[j] = kAtLower;
          x[j] = lo[j];
          moved = true;
        } else {
          work_cost[j] -= d[j];
          d[j] = 0.0;
        }
      } else if (st[j] == kFree && std::abs(d[j]) > dtol) {
        work_cost[j] -= d[j];
        d[j] = 0.0;
      }
    }
    return moved;
  }

  void perturb_costs() {
    for (int j = 0; j < n; ++j) {
      if (is_fixed(j)) continue;
      const double mag = 1e-7 * (1.0 + std::abs(cost[j])) * (0.5 + unit_hash(static_cast<std::uint64_t>(j)));
      work_cost[j] += st[j] == kAtUpper ? -mag : mag;
    }
  }

  void refresh() {
    ensure_factored();
    compute_primal();
    compute_duals();
  }

  void check_guard() {
    if (++iter > max_iter) throw NumericalFailure("simplex iteration guard exhausted");
    ++total_iterations;
  }

  void push_eta(int r, const Vec& alpha) {
    Eta e;
    e.row = r;
    e.pivot = alpha[r];
    for (int i = 0; i < m; ++i) {
      if (i != r && alpha[i] != 0.0) {
        e.index.push_back(i);
        e.value.push_back(alpha[i]);
      }
    }
    etas.push_back(std::move(e));
    fresh = false;
  }

  // Dual simplex on the working costs. Returns kOptimal when the basis is
  // primal feasible and kInfeasible on a dual ray.
  LpStatus dual_phase() {
    const double ptol = opt.primal_tolerance;
    const double dtol = opt.dual_tolerance;
    const double pivtol = opt.pivot_tolerance;
    const long bland_after = 5L * (n + m);
    long degenerate = 0;
    std::vector<Candidate> cands;
    std::vector<int> flips;

    for (;;) {
      if (static_cast<int>(etas.size()) >= opt.refactor_interval) {
        refresh();
        if (make_dual_feasible()) compute_primal();
      }

      const bool bland = degenerate > bland_after;
      int r = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i) {
        const double inf = primal_infeasibility(head[i]);
        if (inf <= ptol) continue;
        if (bland) {
          if (r < 0 || head[i] < head[r]) r = i;
          continue;
        }
        const double score = inf * inf / dse[i];
        if (score > best) {
          best = score;
          r = i;
        }
      }
      if (r < 0) {
        if (!fresh) {
          refresh();
          if (make_dual_feasible()) compute_primal();
          continue;
        }
        return LpStatus::kOptimal;
      }

      const int p = head[r];
      const double target = x[p] < lo[p] ? lo[p] : up[p];
      const double s = x[p] < lo[p] ? -1.0 : 1.0;

      // Row r of B^-1 [A -I].
      work_rho.setZero();
      work_rho[r] = 1.0;
      btran(work_rho);
      std::fill(alpha_row.begin(), alpha_row.end(), 0.0);
      for (int i = 0; i < m; ++i) {
        const double ri = work_rho[i];
        if (ri == 0.0) continue;
        for (int k = row_start[i]; k < row_start[i + 1]; ++k) alpha_row[row_col[k]] += row_val[k] * ri;
        alpha_row[n + i] = -ri;
      }

      cands.clear();
      for (int j = 0; j < n + m; ++j) {
        if (st[j] == kBasic || is_fixed(j)) continue;
        const double a = alpha_row[j];
        if (std::abs(a) < pivtol) continue;
        const double sa = s * a;
        const bool eligible = (st[j] == kAtLower && sa > 0.0) || (st[j] == kAtUpper && sa < 0.0) ||
                              st[j] == kFree;
        if (!eligible) continue;
        cands.push_back({j, std::max(0.0, st[j] == kFree ? 0.0 : d[j] / a * s), std::abs(a)});
      }
      if (cands.empty()) {
        if (!fresh) {
          refresh();
          if (make_dual_feasible()) compute_primal();
          continue;
        }
        return LpStatus::kInfeasible;
      }

      // Bound-flipping ratio test: pass boxed breakpoints while the dual
      // objective keeps improving, then pick the entering column among the
      // remaining near-minimal ratios by pivot size.
      std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.ratio != b.ratio) return a.ratio < b.ratio;
        return a.j < b.j;
      });
      flips.clear();
      double slope = std::abs(x[p] - target);
      std::size_t k = 0;
      if (!bland) {
        for (; k < cands.size(); ++k) {
          const int j = cands[k].j;
          const double range = up[j] - lo[j];
          if (!std::isfinite(range)) break;
          const double next = slope - cands[k].abs_alpha * range;
          if (next <= ptol) break;
          slope = next;
        }
        if (k == cands.size()) {
          // Every breakpoint can be passed: the dual is unbounded.
          if (!fresh) {
            refresh();
            if (make_dual_feasible()) compute_primal();
            continue;
          }
          return LpStatus::kInfeasible;
        }
      }
      int q = -1;
      std::size_t qpos = k;
      if (bland) {
        q = cands[0].j;
        qpos = 0;
      } else {
        double bound = kInf;
        for (std::size_t i = k; i < cands.size(); ++i) {
          bound = std::min(bound, (std::abs(d[cands[i].j]) + dtol) / cands[i].abs_alpha);
        }
        double best_alpha = 0.0;
        for (std::size_t i = k; i < cands.size(); ++i) {
          if (cands[i].ratio <= bound && cands[i].abs_alpha > best_alpha) {
            best_alpha = cands[i].abs_alpha;
            q = cands[i].j;
            qpos = i;
          }
        }
        if (q < 0) {
          q = cands[k].j;
          qpos = k;
        }
      }
      for (std::size_t i = 0; i < k && !bland; ++i) flips.push_back(cands[i].j);
      (void)qpos;

      load_column(q, work_col);
      ftran(work_col);
      const double pivot = work_col[r];
      if (std::abs(pivot - alpha_row[q]) > 1e-7 * (1.0 + std::abs(pivot)) ||
          std::abs(pivot) < pivtol) {
        if (!fresh) {
          refresh();
          if (make_dual_feasible()) compute_primal();
          continue;
        }
        if (std::abs(pivot) < pivtol) throw NumericalFailure("dual simplex pivot too small");
      }
      check_guard();

      double theta_d = d[q] / pivot;
      if (s * theta_d < 0.0) theta_d = 0.0;
      if (theta_d != 0.0) {
        for (int j = 0; j < n + m; ++j) {
          if (st[j] != kBasic && alpha_row[j] != 0.0) d[j] -= theta_d * alpha_row[j];
        }
      }
      d[q] = 0.0;
      d[p] = -theta_d;

      if (!flips.empty()) {
        work_flip.setZero();
        for (int j : flips) {
          const double delta = st[j] == kAtLower ? up[j] - lo[j] : lo[j] - up[j];
          st[j] = st[j] == kAtLower ? kAtUpper : kAtLower;
          x[j] = st[j] == kAtLower ? lo[j] : up[j];
          if (j < n) {
            for (int kk = col_start[j]; kk < col_start[j + 1]; ++kk)
              work_flip[col_row[kk]] += col_val[kk] * delta;
          } else {
            work_flip[j - n] -= delta;
          }
        }
        ftran(work_flip);
        for (int i = 0; i < m; ++i) x[head[i]] -= work_flip[i];
      }

      const double theta_p = (x[p] - target) / pivot;
      for (int i = 0; i < m; ++i) x[head[i]] -= theta_p * work_col[i];
      x[q] += theta_p;
      x[p] = target;

      // Dual steepest-edge weights.
      const double wr = std::max(work_rho.squaredNorm(), 1e-12);
      work_tau = work_rho;
      ftran(work_tau);
      for (int i = 0; i < m; ++i) {
        if (i == r || work_col[i] == 0.0) continue;
        const double ratio = work_col[i] / pivot;
        dse[i] = std::max(dse[i] - 2.0 * ratio * work_tau[i] + ratio * ratio * wr, 1e-8);
      }
      dse[r] = std::max(wr / (pivot * pivot), 1e-8);

      head[r] = q;
      st[p] = (target == lo[p]) ? kAtLower : kAtUpper;
      st[q] = kBasic;
      push_eta(r, work_col);

      if (theta_d == 0.0) {
        ++degenerate;
      } else {
        degenerate = 0;
      }
    }
  }

  // Primal phase 2 from a primal feasible basis on the true costs.
  LpStatus primal_phase() {
    const double ptol = opt.primal_tolerance;
    const double dtol = opt.dual_tolerance;
    const double pivtol = opt.pivot_tolerance;
    const long bland_after = 5L * (n + m);
    long degenerate = 0;
    Vec y(m);

    for (;;) {
      if (static_cast<int>(etas.size()) >= opt.refactor_interval) {
        ensure_factored();
        compute_primal();
      }
      const bool bland = degenerate > bland_after;
      for (int r = 0; r < m; ++r) y[r] = cost[head[r]];
      btran(y);
      int q = -1;
      double dq = 0.0;
      double best = 0.0;
      for (int j = 0; j < n + m; ++j) {
        if (st[j] == kBasic || is_fixed(j)) continue;
        const double dj = cost[j] - column_dot(j, y);
        d[j] = dj;
        const bool improving = (st[j] == kAtLower && dj < -dtol) || (st[j] == kAtUpper && dj > dtol) ||
                               (st[j] == kFree && std::abs(dj) > dtol);
        if (!improving) continue;
        if (bland) {
          q = j;
          dq = dj;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          q = j;
          dq = dj;
        }
      }
      if (q < 0) {
        if (!fresh) {
          ensure_factored();
          compute_primal();
          continue;
        }
        return LpStatus::kOptimal;
      }
      check_guard();

      load_column(q, work_col);
      ftran(work_col);
      const double dir = dq < 0.0 ? 1.0 : -1.0;

      int leave = -1;
      double leave_target = 0.0;
      double theta = kInf;
      auto limit = [&](int k, double rate, double& tgt) {
        if (rate > 0.0) {
          if (!std::isfinite(up[k])) return false;
          tgt = up[k];
          return true;
        }
        if (!std::isfinite(lo[k])) return false;
        tgt = lo[k];
        return true;
      };
      if (!bland) {
        double tmax = kInf;
        for (int r = 0; r < m; ++r) {
          const double rate = -dir * work_col[r];
          double tgt;
          if (std::abs(rate) < pivtol || !limit(head[r], rate, tgt)) continue;
          const double room = std::max(0.0, rate > 0.0 ? tgt - x[head[r]] : x[head[r]] - tgt);
          tmax = std::min(tmax, (room + ptol) / std::abs(rate));
        }
        double best_rate = 0.0;
        for (int r = 0; r < m; ++r) {
          const double rate = -dir * work_col[r];
          double tgt;
          if (std::abs(rate) < pivtol || !limit(head[r], rate, tgt)) continue;
          const double room = std::max(0.0, rate > 0.0 ? tgt - x[head[r]] : x[head[r]] - tgt);
          if (room / std::abs(rate) <= tmax && std::abs(rate) > best_rate) {
            best_rate = std::abs(rate);
            leave = r;
            leave_target = tgt;
            theta = room / std::abs(rate);
          }
        }
      } else {
        for (int r = 0; r < m; ++r) {
          const double rate = -dir * work_col[r];
          double tgt;
          if (std::abs(rate) < pivtol || !limit(head[r], rate, tgt)) continue;
          const double room = std::max(0.0, rate > 0.0 ? tgt - x[head[r]] : x[head[r]] - tgt);
          const double ratio = room / std::abs(rate);
          if (leave < 0 || ratio < theta - 1e-12 || (ratio <= theta + 1e-12 && head[r] < head[leave])) {
            leave = r;
            leave_target = tgt;
            theta = ratio;
          }
        }
      }

      const double range = up[q] - lo[q];
      if (leave < 0 && !std::isfinite(range)) return LpStatus::kUnbounded;
      if (std::isfinite(range) && (leave < 0 || range <= theta)) {
        for (int r = 0; r < m; ++r) x[head[r]] += -dir * work_col[r] * range;
        st[q] = dir > 0.0 ? kAtUpper : kAtLower;
        x[q] = dir > 0.0 ? up[q] : lo[q];
        degenerate = 0;
        continue;
      }

      x[q] += dir * theta;
      for (int r = 0; r < m; ++r) x[head[r]] += -dir * work_col[r] * theta;
      const int k = head[leave];
      x[k] = leave_target;
      st[k] = (leave_target == lo[k]) ? kAtLower : kAtUpper;
      head[leave] = q;
      st[q] = kBasic;
      push_eta(leave, work_col);
      if (theta < 1e-12) {
        ++degenerate;
      } else {
        degenerate = 0;
      }
    }
  }

  bool primal_feasible() const {
    for (int r = 0; r < m; ++r) {
      if (primal_infeasibility(head[r]) > opt.primal_tolerance) return false;
    }
    return true;
  }

  bool dual_feasible() const {
    const double dtol = opt.dual_tolerance;
    for (int j = 0; j < n + m; ++j) {
      if (st[j] == kBasic || is_fixed(j)) continue;
      if ((st[j] == kAtLower && d[j] < -dtol) || (st[j] == kAtUpper && d[j] > dtol) ||
          (st[j] == kFree && std::abs(d[j]) > dtol))
        return false;
    }
    return true;
  }

  // Without rows every column sits at the bound its cost prefers.
  LpStatus solve_unconstrained() {
    for (int j = 0; j < n; ++j) {
      if (cost[j] > 0.0) {
        if (!std::isfinite(lo[j])) return LpStatus::kUnbounded;
        st[j] = kAtLower;
      } else if (cost[j] < 0.0) {
        if (!std::isfinite(up[j])) return LpStatus::kUnbounded;
        st[j] = kAtUpper;
      }
      place_nonbasic(j);
    }
    return LpStatus::kOptimal;
  }

  LpStatus run() {
    if (m == 0) return solve_unconstrained();
    iter = 0;
    max_iter = opt.max_iterations > 0 ? opt.max_iterations : std::max<long>(20000, 50L * (n + m));
    if (!factored) ensure_factored();
    for (int pass = 0; pass < 8; ++pass) {
      work_cost = cost;
      if (pass == 0) perturb_costs();
      refresh();
      if (make_dual_feasible()) compute_primal();
      if (dual_phase() == LpStatus::kInfeasible) {
        work_cost = cost;
        return LpStatus::kInfeasible;
      }
      work_cost = cost;
      compute_duals();
      if (dual_feasible()) return LpStatus::kOptimal;
      if (primal_phase() == LpStatus::kUnbounded) return LpStatus::kUnbounded;
      ensure_factored();
      compute_primal();
      if (primal_feasible()) {
        compute_duals();
        if (dual_feasible()) return LpStatus::kOptimal;
      }
    }
    throw NumericalFailure("simplex failed to settle between dual and primal phases");
  }
};

LpSolver::LpSolver(const MilpModel& model, LpOptions options)
    : impl_(std::make_unique<Impl>(model, options)) {}

LpSolver::~LpSolver() = default;

int LpSolver::num_columns() const { return impl_->n; }
int LpSolver::num_rows() const { return impl_->m; }

void LpSolver::set_bounds(int column, double lower, double upper) {
  Impl& s = *impl_;
  s.orig_lo[column] = lower;
  s.orig_up[column] = upper;
  s.lo[column] = lower / s.col_scale[column];
  s.up[column] = upper / s.col_scale[column];
  if (s.st[column] != kBasic) s.place_nonbasic(column);
}

double LpSolver::lower(int column) const { return impl_->orig_lo[column]; }
double LpSolver::upper(int column) const { return impl_->orig_up[column]; }

LpStatus LpSolver::solve() { return impl_->run(); }

double LpSolver::objective() const {
  const Impl& s = *impl_;
  double z = 0.0;
  for (int j = 0; j < s.n; ++j) z += s.orig_cost[j] * (s.x[j] * s.col_scale[j]);
  return z + s.offset;
}

std::vector<double> LpSolver::solution() const {
  const Impl& s = *impl_;
  std::vector<double> v(s.n);
  for (int j = 0; j < s.n; ++j) v[j] = s.x[j] * s.col_scale[j];
  return v;
}

double LpSolver::value(int column) const { return impl_->x[column] * impl_->col_scale[column]; }

Basis LpSolver::basis() const { return Basis{impl_->st}; }

void LpSolver::set_basis(const Basis& b) {
  Impl& s = *impl_;
  const int total = s.n + s.m;
  if (static_cast<int>(b.status.size()) != total ||
      std::count(b.status.begin(), b.status.end(), kBasic) != s.m) {
    s.slack_basis();
    return;
  }
  s.st = b.status;
  int r = 0;
  for (int j = 0; j < total; ++j) {
    if (s.st[j] == kBasic) {
      s.head[r++] = j;
    } else {
      s.place_nonbasic(j);
    }
  }
  s.dse.assign(s.m, 1.0);
  if (!s.refactor()) s.slack_basis();
}

long LpSolver::iterations() const { return impl_->total_iterations; }

}  // namespace psps::milp
