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

#include "nscsg/lp.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace nscsg {
namespace {

TEST(LpTest, SingleBound) {
  LinearProgram lp;
  lp.objective = {1.0};
  lp.a_ub = {{1.0}};
  lp.b_ub = {3.0};
  LpResult r = lp_solve(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.x[0], 3.0, 1e-12);
  EXPECT_NEAR(r.objective, 3.0, 1e-12);
}

TEST(LpTest, Infeasible) {
  LinearProgram lp;
  lp.objective = {1.0, 1.0};
  lp.a_ub = {{1.0, 1.0}};
  lp.b_ub = {1.0};
  lp.a_eq = {{1.0, 0.0}};
  lp.b_eq = {2.0};
  EXPECT_EQ(lp_solve(lp).status, LpStatus::kInfeasible);
}

TEST(LpTest, Unbounded) {
  LinearProgram lp;
  lp.objective = {1.0, 0.0};
  lp.a_ub = {{-1.0, 1.0}};
  lp.b_ub = {1.0};
  EXPECT_EQ(lp_solve(lp).status, LpStatus::kUnbounded);
}

TEST(LpTest, FreeVariable) {
  // max -|x - 2| style: max t s.t. t <= x - 2, t <= 2 - x, x free.
  LinearProgram lp;
  lp.objective = {0.0, 1.0};
  lp.a_ub = {{-1.0, 1.0}, {1.0, 1.0}};
  lp.b_ub = {-2.0, 2.0};
  lp.lower = {-kInf, -kInf};
  LpResult r = lp_solve(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.x[0], 2.0, 1e-9);
  EXPECT_NEAR(r.objective, 0.0, 1e-9);
}

TEST(LpTest, DegenerateIsDeterministic) {
  // Many constraints tight at the optimum vertex.
  LinearProgram lp;
  lp.objective = {1.0, 1.0, 1.0};
  for (int k = 0; k < 6; ++k) {
    lp.a_ub.push_back({1.0, double(k % 2), double(k % 3 == 0)});
    lp.b_ub.push_back(1.0);
  }
  lp.a_ub.push_back({1.0, 1.0, 1.0});
  lp.b_ub.push_back(1.0);
  LpResult a = lp_solve(lp);
  LpResult b = lp_solve(lp);
  ASSERT_EQ(a.status, LpStatus::kOptimal);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_NEAR(a.objective, 1.0, 1e-12);
}

// Brute force over all vertices of {A x <= b, 0 <= x <= u}.
std::optional<double> VertexOracle(const LinearProgram& lp) {
  const int n = lp.objective.size();
  std::vector<std::vector<double>> rows = lp.a_ub;
  std::vector<double> rhs = lp.b_ub;
  for (int j = 0; j < n; ++j) {
    std::vector<double> lo(n, 0.0), hi(n, 0.0);
    lo[j] = -1.0;
    hi[j] = 1.0;
    rows.push_back(lo);
    rhs.push_back(0.0);
    rows.push_back(hi);
    rhs.push_back(lp.upper[j]);
  }
  const int m = rows.size();
  std::optional<double> best;
  std::vector<int> pick(n);
  // Iterate over n-subsets via bit masks.
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    if (__builtin_popcount(mask) != n) continue;
    int k = 0;
    for (int i = 0; i < m; ++i) {
      if (mask >> i & 1) pick[k++] = i;
    }
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1));
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) a[r][c] = rows[pick[r]][c];
      a[r][n] = rhs[pick[r]];
    }
    bool singular = false;
    for (int c = 0; c < n && !singular; ++c) {
      int p = c;
      for (int r = c + 1; r < n; ++r) {
        if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
      }
      if (std::abs(a[p][c]) < 1e-9) {
        singular = true;
        break;
      }
      std::swap(a[p], a[c]);
      for (int r = 0; r < n; ++r) {
        if (r == c) continue;
        double f = a[r][c] / a[c][c];
        for (int cc = c; cc <= n; ++cc) a[r][cc] -= f * a[c][cc];
      }
    }
    if (singular) continue;
    std::vector<double> x(n);
    for (int c = 0; c < n; ++c) x[c] = a[c][n] / a[c][c];
    bool feasible = true;
    for (int i = 0; i < m && feasible; ++i) {
      double lhs = 0;
      for (int c = 0; c < n; ++c) lhs += rows[i][c] * x[c];
      feasible = lhs <= rhs[i] + 1e-9;
    }
    if (!feasible) continue;
    double obj = 0;
    for (int c = 0; c < n; ++c) obj += lp.objective[c] * x[c];
    if (!best || obj > *best) best = obj;
  }
  return best;
}

TEST(LpTest, RandomAgainstVertexEnumeration) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> coef(-4, 4);
  int feasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 3;
    const int m = 1 + (trial / 3) % 4;
    LinearProgram lp;
    for (int j = 0; j < n; ++j) lp.objective.push_back(coef(rng));
    for (int i = 0; i < m; ++i) {
      std::vector<double> row;
      for (int j = 0; j < n; ++j) row.push_back(coef(rng));
      lp.a_ub.push_back(row);
      lp.b_ub.push_back(coef(rng));
    }
    lp.upper.assign(n, 5.0);
    std::optional<double> oracle = VertexOracle(lp);
    LpResult r = lp_solve(lp);
    if (!oracle) {
      EXPECT_EQ(r.status, LpStatus::kInfeasible) << "trial " << trial;
      continue;
    }
    ++feasible;
    ASSERT_EQ(r.status, LpStatus::kOptimal) << "trial " << trial;
    EXPECT_NEAR(r.objective, *oracle, 1e-7) << "trial " << trial;
    for (int i = 0; i < m; ++i) {
      double lhs = 0;
      for (int j = 0; j < n; ++j) lhs += lp.a_ub[i][j] * r.x[j];
      EXPECT_LE(lhs, lp.b_ub[i] + 1e-9);
    }
    for (int j = 0; j < n; ++j) {
      EXPECT_GE(r.x[j], -1e-9);
      EXPECT_LE(r.x[j], 5.0 + 1e-9);
    }
  }
  EXPECT_GT(feasible, 100);
}

}  // namespace
}  // namespace nscsg
