// Copyright 2026 The nscsg Authors
//
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

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "nscsg/error.hpp"

namespace nscsg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// maximize objective . x
// subject to a_ub x <= b_ub, a_eq x = b_eq, lower <= x <= upper.
// Empty `lower` means all zero; empty `upper` means unbounded above.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> a_ub;
  std::vector<double> b_ub;
  std::vector<std::vector<double>> a_eq;
  std::vector<double> b_eq;
  std::vector<double> lower;
  std::vector<double> upper;

  int num_vars() const { return objective.size(); }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

struct LpResult {
  LpStatus status = LpStatus::kNumericalFailure;
  std::vector<double> x;
  double objective = 0.0;
  double max_residual = 0.0;  // worst violation of the original constraints
  int iterations = 0;
};

inline const char* LpStatusName(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace internal {

// Dense two-phase tableau simplex on: max c.y, rows (sense, rhs), y >= 0.
class Tableau {
 public:
  enum Sense { kLe, kEq, kGe };

  Tableau(const std::vector<std::vector<double>>& rows,
          const std::vector<Sense>& senses, std::vector<double> rhs,
          const std::vector<double>& cost, double eps)
      : m_(rows.size()), n_(cost.size()), eps_(eps) {
    std::vector<std::vector<double>> a = rows;
    std::vector<Sense> sense = senses;
    for (int r = 0; r < m_; ++r) {
      if (rhs[r] < 0) {
        for (double& v : a[r]) v = -v;
        rhs[r] = -rhs[r];
        if (sense[r] == kLe) sense[r] = kGe;
        else if (sense[r] == kGe) sense[r] = kLe;
      }
    }
    int slacks = 0, artificials = 0;
    for (Sense s : sense) {
      if (s != kEq) ++slacks;
      if (s != kLe) ++artificials;
    }
    first_art_ = n_ + slacks;
    cols_ = first_art_ + artificials;
    t_.assign(m_ + 1, std::vector<double>(cols_ + 1, 0.0));
    basis_.assign(m_, -1);
    int next_slack = n_, next_art = first_art_;
    for (int r = 0; r < m_; ++r) {
      for (int j = 0; j < n_; ++j) t_[r][j] = a[r][j];
      t_[r][cols_] = rhs[r];
      if (sense[r] == kLe) {
        t_[r][next_slack] = 1.0;
        basis_[r] = next_slack++;
      } else {
        if (sense[r] == kGe) t_[r][next_slack++] = -1.0;
        t_[r][next_art] = 1.0;
        basis_[r] = next_art++;
      }
    }
    cost_ = cost;
    cost_.resize(cols_, 0.0);
  }

  // Returns the final status; the optimal primal point is read with Value.
  LpStatus Solve(int& iterations) {
    if (cols_ > first_art_) {
      std::vector<double> phase1(cols_, 0.0);
      for (int j = first_art_; j < cols_; ++j) phase1[j] = -1.0;
      SetObjective(phase1);
      LpStatus s = Iterate(/*allow_artificial=*/true, iterations);
      if (s != LpStatus::kOptimal) return LpStatus::kNumericalFailure;
      double scale = 1.0;
      for (int r = 0; r < m_; ++r) scale = std::max(scale, std::abs(t_[r][cols_]));
      if (t_[m_][cols_] < -1e-7 * scale) return LpStatus::kInfeasible;
      DriveOutArtificials();
    }
    SetObjective(cost_);
    return Iterate(/*allow_artificial=*/false, iterations);
  }

  std::vector<double> Values() const {
    std::vector<double> y(n_, 0.0);
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_) y[basis_[r]] = t_[r][cols_];
    }
    return y;
  }

 private:
  void SetObjective(const std::vector<double>& c) {
    auto& z = t_[m_];
    for (int j = 0; j <= cols_; ++j) z[j] = 0.0;
    for (int j = 0; j < cols_; ++j) z[j] = -c[j];
    for (int r = 0; r < m_; ++r) {
      double cb = c[basis_[r]];
      if (cb == 0.0) continue;
      for (int j = 0; j <= cols_; ++j) z[j] += cb * t_[r][j];
    }
  }

  void Pivot(int row, int col) {
    auto& pr = t_[row];
    double inv = 1.0 / pr[col];
    for (double& v : pr) v *= inv;
    pr[col] = 1.0;
    for (int r = 0; r <= m_; ++r) {
      if (r == row) continue;
      double f = t_[r][col];
      if (f == 0.0) continue;
      auto& tr = t_[r];
      for (int j = 0; j <= cols_; ++j) tr[j] -= f * pr[j];
      tr[col] = 0.0;
    }
    basis_[row] = col;
  }

  LpStatus Iterate(bool allow_artificial, int& iterations) {
    const int limit = 50000 + 50 * (m_ + cols_);
    const int ncols = allow_artificial ? cols_ : first_art_;
    int degenerate_run = 0;
    for (int it = 0; it < limit; ++it) {
      const auto& z = t_[m_];
      const bool bland = degenerate_run > 50;
      int enter = -1;
      double best = -eps_;
      for (int j = 0; j < ncols; ++j) {
        if (z[j] < best) {
          enter = j;
          if (bland) break;
          best = z[j];
        }
      }
      if (enter < 0) return LpStatus::kOptimal;
      int leave = -1;
      double ratio = kInf;
      for (int r = 0; r < m_; ++r) {
        double a = t_[r][enter];
        if (a <= eps_) continue;
        double q = t_[r][cols_] / a;
        if (q < ratio - 1e-12 ||
            (q <= ratio + 1e-12 && leave >= 0 && basis_[r] < basis_[leave])) {
          ratio = std::min(ratio, q);
          leave = r;
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      degenerate_run = (ratio <= 1e-12) ? degenerate_run + 1 : 0;
      Pivot(leave, enter);
      ++iterations;
    }
    return LpStatus::kNumericalFailure;
  }

  void DriveOutArtificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < first_art_) continue;
      int col = -1;
      double best = eps_;
      for (int j = 0; j < first_art_; ++j) {
        if (std::abs(t_[r][j]) > best) {
          best = std::abs(t_[r][j]);
          col = j;
        }
      }
      // A row with no usable column is redundant; its artificial stays
      // basic at zero and can never re-enter.
      if (col >= 0) Pivot(r, col);
    }
  }

  int m_, n_, cols_ = 0, first_art_ = 0;
  double eps_;
  std::vector<std::vector<double>> t_;
  std::vector<int> basis_;
  std::vector<double> cost_;
};

}  // namespace internal

inline LpResult lp_solve(const LinearProgram& lp, double tol = 1e-9) {
  const int n = lp.num_vars();
  auto lower_of = [&](int j) { return lp.lower.empty() ? 0.0 : lp.lower[j]; };
  auto upper_of = [&](int j) { return lp.upper.empty() ? kInf : lp.upper[j]; };
  for (const auto& row : lp.a_ub) {
    if (static_cast<int>(row.size()) != n) Fail(ErrorKind::kDimension, "a_ub width");
  }
  for (const auto& row : lp.a_eq) {
    if (static_cast<int>(row.size()) != n) Fail(ErrorKind::kDimension, "a_eq width");
  }
  if (lp.a_ub.size() != lp.b_ub.size() || lp.a_eq.size() != lp.b_eq.size() ||
      (!lp.lower.empty() && static_cast<int>(lp.lower.size()) != n) ||
      (!lp.upper.empty() && static_cast<int>(lp.upper.size()) != n)) {
    Fail(ErrorKind::kDimension, "linear program shape mismatch");
  }

  // x_j = offset_j + sum_k map[j][k] * y_k with y >= 0.
  struct Column { int var; double sign; };
  std::vector<Column> columns;
  std::vector<double> offset(n, 0.0);
  std::vector<std::vector<std::pair<int, double>>> map(n);
  std::vector<std::vector<double>> extra_rows;
  std::vector<double> extra_rhs;
  for (int j = 0; j < n; ++j) {
    double lo = lower_of(j), hi = upper_of(j);
    if (lo > hi) {
      LpResult r;
      r.status = LpStatus::kInfeasible;
      return r;
    }
    if (std::isfinite(lo)) {
      offset[j] = lo;
      map[j].push_back({static_cast<int>(columns.size()), 1.0});
      columns.push_back({j, 1.0});
      if (std::isfinite(hi)) {
        extra_rows.push_back({});  // filled below once width is known
        extra_rhs.push_back(hi - lo);
      }
    } else if (std::isfinite(hi)) {
      offset[j] = hi;
      map[j].push_back({static_cast<int>(columns.size()), -1.0});
      columns.push_back({j, -1.0});
    } else {
      map[j].push_back({static_cast<int>(columns.size()), 1.0});
      columns.push_back({j, 1.0});
      map[j].push_back({static_cast<int>(columns.size()), -1.0});
      columns.push_back({j, -1.0});
    }
  }
  const int ny = columns.size();
  auto transform = [&](const std::vector<double>& row, double rhs,
                       std::vector<double>& out, double& out_rhs) {
    out.assign(ny, 0.0);
    out_rhs = rhs;
    for (int j = 0; j < n; ++j) {
      if (row[j] == 0.0) continue;
      out_rhs -= row[j] * offset[j];
      for (auto [k, s] : map[j]) out[k] += row[j] * s;
    }
  };
  std::vector<std::vector<double>> rows;
  std::vector<internal::Tableau::Sense> senses;
  std::vector<double> rhs;
  for (size_t r = 0; r < lp.a_ub.size(); ++r) {
    std::vector<double> row;
    double b;
    transform(lp.a_ub[r], lp.b_ub[r], row, b);
    rows.push_back(std::move(row));
    senses.push_back(internal::Tableau::kLe);
    rhs.push_back(b);
  }
  for (size_t r = 0; r < lp.a_eq.size(); ++r) {
    std::vector<double> row;
    double b;
    transform(lp.a_eq[r], lp.b_eq[r], row, b);
    rows.push_back(std::move(row));
    senses.push_back(internal::Tableau::kEq);
    rhs.push_back(b);
  }
  {
    int e = 0;
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(lower_of(j)) && std::isfinite(upper_of(j))) {
        std::vector<double> row(ny, 0.0);
        row[map[j][0].first] = 1.0;
        rows.push_back(std::move(row));
        senses.push_back(internal::Tableau::kLe);
        rhs.push_back(extra_rhs[e++]);
      }
    }
  }
  std::vector<double> cost(ny, 0.0);
  for (int j = 0; j < n; ++j) {
    for (auto [k, s] : map[j]) cost[k] += lp.objective[j] * s;
  }

  internal::Tableau tab(rows, senses, rhs, cost, tol);
  LpResult res;
  res.status = tab.Solve(res.iterations);
  if (res.status != LpStatus::kOptimal) return res;
  std::vector<double> y = tab.Values();
  res.x = offset;
  for (int j = 0; j < n; ++j) {
    for (auto [k, s] : map[j]) res.x[j] += s * y[k];
  }
  res.objective = 0.0;
  for (int j = 0; j < n; ++j) res.objective += lp.objective[j] * res.x[j];

  double worst = 0.0;
  for (size_t r = 0; r < lp.a_ub.size(); ++r) {
    double v = -lp.b_ub[r];
    for (int j = 0; j < n; ++j) v += lp.a_ub[r][j] * res.x[j];
    worst = std::max(worst, v);
  }
  for (size_t r = 0; r < lp.a_eq.size(); ++r) {
    double v = -lp.b_eq[r];
    for (int j = 0; j < n; ++j) v += lp.a_eq[r][j] * res.x[j];
    worst = std::max(worst, std::abs(v));
  }
  for (int j = 0; j < n; ++j) {
    worst = std::max(worst, lower_of(j) - res.x[j]);
    worst = std::max(worst, res.x[j] - upper_of(j));
  }
  res.max_residual = worst;
  if (worst > 1e-6) res.status = LpStatus::kNumericalFailure;
  return res;
}

}  // namespace nscsg
