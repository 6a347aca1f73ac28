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
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "nscsg/error.hpp"
#include "nscsg/lp.hpp"

namespace nscsg {

using RealVec = std::vector<double>;

// Two-player normal-form game; payoffs stored row-major.
struct BimatrixGame {
  int rows = 0;
  int cols = 0;
  RealVec p1, p2;

  BimatrixGame() = default;
  BimatrixGame(int r, int c) : rows(r), cols(c), p1(r * c, 0.0), p2(r * c, 0.0) {}

  double u1(int r, int c) const { return p1[r * cols + c]; }
  double u2(int r, int c) const { return p2[r * cols + c]; }
  double& u1(int r, int c) { return p1[r * cols + c]; }
  double& u2(int r, int c) { return p2[r * cols + c]; }

  // Builds a game from {{(a,b), ...}, ...} payoff pairs.
  static BimatrixGame FromPairs(
      const std::vector<std::vector<std::pair<double, double>>>& m) {
    BimatrixGame g(m.size(), m.empty() ? 0 : m[0].size());
    for (int r = 0; r < g.rows; ++r) {
      if (static_cast<int>(m[r].size()) != g.cols) {
        Fail(ErrorKind::kDimension, "ragged payoff matrix");
      }
      for (int c = 0; c < g.cols; ++c) {
        g.u1(r, c) = m[r][c].first;
        g.u2(r, c) = m[r][c].second;
      }
    }
    return g;
  }
};

struct MixedProfile {
  RealVec row;
  RealVec col;
};

struct NashEquilibrium {
  MixedProfile profile;
  std::array<double, 2> payoff{};
};

struct CorrelatedEquilibrium {
  RealVec joint;  // indexed r * cols + c
  std::array<double, 2> payoff{};
};

enum class EquilibriumType { kNash, kCorrelated };
enum class SelectionPolicy { kFirstFound, kSeededRandom, kSwOptimal };

inline const char* EquilibriumTypeName(EquilibriumType t) {
  return t == EquilibriumType::kNash ? "ne" : "ce";
}

// Equilibrium of one stage game in a type-agnostic form. For Nash
// equilibria `joint` is the product of `row` and `col`; for correlated
// equilibria `row` and `col` are empty.
struct StageEquilibrium {
  RealVec row, col, joint;
  std::array<double, 2> payoff{};
  double welfare() const { return payoff[0] + payoff[1]; }
};

inline RealVec ProductDistribution(const RealVec& row, const RealVec& col) {
  RealVec joint(row.size() * col.size());
  for (size_t r = 0; r < row.size(); ++r) {
    for (size_t c = 0; c < col.size(); ++c) joint[r * col.size() + c] = row[r] * col[c];
  }
  return joint;
}

inline std::array<double, 2> ExpectedPayoff(const BimatrixGame& g,
                                            const RealVec& joint) {
  std::array<double, 2> v{0.0, 0.0};
  for (int k = 0; k < g.rows * g.cols; ++k) {
    v[0] += joint[k] * g.p1[k];
    v[1] += joint[k] * g.p2[k];
  }
  return v;
}

inline StageEquilibrium FromNash(const NashEquilibrium& ne) {
  StageEquilibrium s;
  s.row = ne.profile.row;
  s.col = ne.profile.col;
  s.joint = ProductDistribution(s.row, s.col);
  s.payoff = ne.payoff;
  return s;
}

inline StageEquilibrium FromCorrelated(const CorrelatedEquilibrium& ce) {
  StageEquilibrium s;
  s.joint = ce.joint;
  s.payoff = ce.payoff;
  return s;
}

namespace internal {

// Solves the square system a x = b by partial pivoting; false if singular.
inline bool SolveLinear(std::vector<RealVec> a, RealVec b, RealVec& x,
                        double eps = 1e-10) {
  const int n = b.size();
  double scale = 0.0;
  for (const auto& row : a) {
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  if (scale == 0.0) return false;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int r = k + 1; r < n; ++r) {
      if (std::abs(a[r][k]) > std::abs(a[piv][k])) piv = r;
    }
    if (std::abs(a[piv][k]) <= eps * scale) return false;
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (int r = k + 1; r < n; ++r) {
      double f = a[r][k] / a[k][k];
      if (f == 0.0) continue;
      for (int c = k; c < n; ++c) a[r][c] -= f * a[k][c];
      b[r] -= f * b[k];
    }
  }
  x.assign(n, 0.0);
  for (int k = n - 1; k >= 0; --k) {
    double v = b[k];
    for (int c = k + 1; c < n; ++c) v -= a[k][c] * x[c];
    x[k] = v / a[k][k];
  }
  return true;
}

// Calls f(subset) for every k-subset of {0..n-1} in lexicographic order.
template <typename F>
void ForEachSubset(int n, int k, F&& f) {
  if (k > n || k <= 0) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

struct Candidate {
  RealVec mix;
  std::vector<int> support;
  std::vector<char> best_reply;  // opponent's best replies to `mix`
};

inline bool NearlyEqual(const RealVec& a, const RealVec& b, double tol) {
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

// Mixed strategies of the player with `own` actions that make the opponent
// indifferent across some equally sized set of opponent actions. Every
// extreme equilibrium strategy appears here. `pay(a, b)` is the opponent's
// payoff when this player plays a and the opponent plays b.
template <typename Pay>
std::vector<Candidate> IndifferenceCandidates(int own, int other, Pay pay,
                                              double tol) {
  std::vector<Candidate> out;
  const int kmax = std::min(own, other);
  for (int k = 1; k <= kmax; ++k) {
    ForEachSubset(own, k, [&](const std::vector<int>& s) {
      ForEachSubset(other, k, [&](const std::vector<int>& t) {
        // Unknowns: x_s for s in S, then w.
        std::vector<RealVec> a(k + 1, RealVec(k + 1, 0.0));
        RealVec b(k + 1, 0.0);
        for (int e = 0; e < k; ++e) {
          for (int v = 0; v < k; ++v) a[e][v] = pay(s[v], t[e]);
          a[e][k] = -1.0;
        }
        for (int v = 0; v < k; ++v) a[k][v] = 1.0;
        b[k] = 1.0;
        RealVec sol;
        if (!SolveLinear(a, b, sol)) return;
        RealVec mix(own, 0.0);
        for (int v = 0; v < k; ++v) {
          if (sol[v] < -1e-9) return;
          mix[s[v]] = std::max(0.0, sol[v]);
        }
        double total = 0.0;
        for (double p : mix) total += p;
        for (double& p : mix) p /= total;
        for (const Candidate& c : out) {
          if (NearlyEqual(c.mix, mix, 1e-9)) return;
        }
        Candidate c;
        c.mix = std::move(mix);
        for (int i = 0; i < own; ++i) {
          if (c.mix[i] > 1e-12) c.support.push_back(i);
        }
        RealVec reply(other, 0.0);
        double best = -kInf;
        for (int j = 0; j < other; ++j) {
          for (int i = 0; i < own; ++i) reply[j] += c.mix[i] * pay(i, j);
          best = std::max(best, reply[j]);
        }
        c.best_reply.resize(other);
        for (int j = 0; j < other; ++j) c.best_reply[j] = reply[j] >= best - tol;
        out.push_back(std::move(c));
      });
    });
  }
  return out;
}

inline bool SupportWithin(const std::vector<int>& support,
                          const std::vector<char>& allowed) {
  for (int i : support) {
    if (!allowed[i]) return false;
  }
  return true;
}

}  // namespace internal

// All extreme Nash equilibria, ordered by total support size, then
// lexicographically by the two supports.
inline std::vector<NashEquilibrium> enumerate_ne(const BimatrixGame& g,
                                                 double tol = 1e-7) {
  if (g.rows <= 0 || g.cols <= 0) Fail(ErrorKind::kDimension, "empty game");
  auto rows = internal::IndifferenceCandidates(
      g.rows, g.cols, [&](int r, int c) { return g.u2(r, c); }, tol);
  auto cols = internal::IndifferenceCandidates(
      g.cols, g.rows, [&](int c, int r) { return g.u1(r, c); }, tol);
  struct Found {
    NashEquilibrium ne;
    const internal::Candidate* x;
    const internal::Candidate* y;
  };
  std::vector<Found> found;
  for (const auto& x : rows) {
    for (const auto& y : cols) {
      if (!internal::SupportWithin(x.support, y.best_reply) ||
          !internal::SupportWithin(y.support, x.best_reply)) {
        continue;
      }
      NashEquilibrium ne;
      ne.profile.row = x.mix;
      ne.profile.col = y.mix;
      ne.payoff = ExpectedPayoff(g, ProductDistribution(x.mix, y.mix));
      found.push_back({std::move(ne), &x, &y});
    }
  }
  std::stable_sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
    size_t sa = a.x->support.size() + a.y->support.size();
    size_t sb = b.x->support.size() + b.y->support.size();
    if (sa != sb) return sa < sb;
    if (a.x->support != b.x->support) return a.x->support < b.x->support;
    return a.y->support < b.y->support;
  });
  std::vector<NashEquilibrium> out;
  for (auto& f : found) out.push_back(std::move(f.ne));
  return out;
}

namespace internal {

// Strict-weak "a is preferred to b" for SW selection.
inline bool PreferByWelfare(const std::array<double, 2>& pa, const RealVec& va,
                            const std::array<double, 2>& pb, const RealVec& vb,
                            double tol) {
  double sa = pa[0] + pa[1], sb = pb[0] + pb[1];
  if (sa > sb + tol) return true;
  if (sa < sb - tol) return false;
  if (pa[0] > pb[0] + tol) return true;
  if (pa[0] < pb[0] - tol) return false;
  for (size_t i = 0; i < va.size(); ++i) {
    if (va[i] > vb[i] + tol) return true;
    if (va[i] < vb[i] - tol) return false;
  }
  return false;
}

inline RealVec Concat(const RealVec& a, const RealVec& b) {
  RealVec out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace internal

// Welfare-maximizing Nash equilibrium; ties go to the larger payoff of the
// first agent, then to the lexicographically larger strategy pair.
inline NashEquilibrium swne(const BimatrixGame& g, double tol = 1e-7) {
  auto all = enumerate_ne(g, tol);
  if (all.empty()) Fail(ErrorKind::kSolver, "no Nash equilibrium found");
  size_t best = 0;
  for (size_t k = 1; k < all.size(); ++k) {
    if (internal::PreferByWelfare(
            all[k].payoff,
            internal::Concat(all[k].profile.row, all[k].profile.col),
            all[best].payoff,
            internal::Concat(all[best].profile.row, all[best].profile.col),
            1e-9)) {
      best = k;
    }
  }
  return all[best];
}

// Correlated equilibrium maximizing objective . joint.
inline CorrelatedEquilibrium ce_with_objective(const BimatrixGame& g,
                                               const RealVec& objective) {
  const int m = g.rows, n = g.cols, nv = m * n;
  LinearProgram lp;
  lp.objective = objective;
  // Row player: following r must be at least as good as switching to r2.
  for (int r = 0; r < m; ++r) {
    for (int r2 = 0; r2 < m; ++r2) {
      if (r2 == r) continue;
      RealVec row(nv, 0.0);
      for (int c = 0; c < n; ++c) row[r * n + c] = g.u1(r2, c) - g.u1(r, c);
      lp.a_ub.push_back(std::move(row));
      lp.b_ub.push_back(0.0);
    }
  }
  for (int c = 0; c < n; ++c) {
    for (int c2 = 0; c2 < n; ++c2) {
      if (c2 == c) continue;
      RealVec row(nv, 0.0);
      for (int r = 0; r < m; ++r) row[r * n + c] = g.u2(r, c2) - g.u2(r, c);
      lp.a_ub.push_back(std::move(row));
      lp.b_ub.push_back(0.0);
    }
  }
  lp.a_eq.push_back(RealVec(nv, 1.0));
  lp.b_eq.push_back(1.0);
  LpResult res = lp_solve(lp);
  if (res.status != LpStatus::kOptimal) {
    Fail(ErrorKind::kSolver, std::string("correlated equilibrium LP: ") +
                                 LpStatusName(res.status));
  }
  CorrelatedEquilibrium ce;
  ce.joint = res.x;
  double total = 0.0;
  for (double& p : ce.joint) {
    p = std::max(0.0, p);
    total += p;
  }
  for (double& p : ce.joint) p /= total;
  ce.payoff = ExpectedPayoff(g, ce.joint);
  return ce;
}

inline CorrelatedEquilibrium ce_extreme(const BimatrixGame& g, double w1,
                                        double w2) {
  RealVec obj(g.rows * g.cols);
  for (size_t k = 0; k < obj.size(); ++k) obj[k] = w1 * g.p1[k] + w2 * g.p2[k];
  return ce_with_objective(g, obj);
}

inline CorrelatedEquilibrium swce(const BimatrixGame& g) {
  return ce_extreme(g, 1.0, 1.0);
}

inline StageEquilibrium any_equilibrium(const BimatrixGame& g,
                                        EquilibriumType type,
                                        SelectionPolicy policy,
                                        std::mt19937_64* rng = nullptr) {
  if (policy == SelectionPolicy::kSwOptimal) {
    return type == EquilibriumType::kNash ? FromNash(swne(g))
                                          : FromCorrelated(swce(g));
  }
  if (policy == SelectionPolicy::kSeededRandom && rng == nullptr) {
    Fail(ErrorKind::kPrecondition, "seeded-random selection needs a generator");
  }
  if (type == EquilibriumType::kNash) {
    auto all = enumerate_ne(g);
    if (all.empty()) Fail(ErrorKind::kSolver, "no Nash equilibrium found");
    size_t pick = 0;
    if (policy == SelectionPolicy::kSeededRandom) pick = (*rng)() % all.size();
    return FromNash(all[pick]);
  }
  // First found: the vertex reached by the feasibility phase alone.
  RealVec dir(g.rows * g.cols, 0.0);
  if (policy == SelectionPolicy::kSeededRandom) {
    // A random direction selects a random vertex of the CE polytope.
    for (double& d : dir) {
      d = 2.0 * (static_cast<double>((*rng)() >> 11) * 0x1.0p-53) - 1.0;
    }
  }
  return FromCorrelated(ce_with_objective(g, dir));
}

// Distinct equilibria worth trying when searching over selections: every
// extreme NE, or for CE the welfare-optimal point, each agent's best and
// worst CE and the product form of every extreme NE.
inline std::vector<StageEquilibrium> CandidateEquilibria(const BimatrixGame& g,
                                                         EquilibriumType type) {
  std::vector<StageEquilibrium> out;
  auto add = [&out](StageEquilibrium e) {
    for (const auto& o : out) {
      if (internal::NearlyEqual(o.joint, e.joint, 1e-9)) return;
    }
    out.push_back(std::move(e));
  };
  if (type == EquilibriumType::kNash) {
    for (const auto& ne : enumerate_ne(g)) add(FromNash(ne));
    return out;
  }
  add(FromCorrelated(swce(g)));
  add(FromCorrelated(ce_extreme(g, 1.0, 0.0)));
  add(FromCorrelated(ce_extreme(g, 0.0, 1.0)));
  add(FromCorrelated(ce_extreme(g, -1.0, 0.0)));
  add(FromCorrelated(ce_extreme(g, 0.0, -1.0)));
  add(FromCorrelated(ce_extreme(g, -1.0, -1.0)));
  for (const auto& ne : enumerate_ne(g)) {
    StageEquilibrium e = FromNash(ne);
    e.row.clear();
    e.col.clear();
    add(std::move(e));
  }
  return out;
}

struct ZeroSumSolution {
  MixedProfile profile;
  double value = 0.0;  // for the row player
};

// Maximin strategies of a zero-sum game given by the row player's payoffs.
inline ZeroSumSolution zero_sum_value(const BimatrixGame& g) {
  const int m = g.rows, n = g.cols;
  ZeroSumSolution out;
  {
    // Variables x_0..x_{m-1}, v. Maximize v with x' P1 >= v per column.
    LinearProgram lp;
    lp.objective.assign(m + 1, 0.0);
    lp.objective[m] = 1.0;
    for (int c = 0; c < n; ++c) {
      RealVec row(m + 1, 0.0);
      for (int r = 0; r < m; ++r) row[r] = -g.u1(r, c);
      row[m] = 1.0;
      lp.a_ub.push_back(std::move(row));
      lp.b_ub.push_back(0.0);
    }
    RealVec sum(m + 1, 1.0);
    sum[m] = 0.0;
    lp.a_eq.push_back(sum);
    lp.b_eq.push_back(1.0);
    lp.lower.assign(m + 1, 0.0);
    lp.lower[m] = -kInf;
    LpResult res = lp_solve(lp);
    if (res.status != LpStatus::kOptimal) {
      Fail(ErrorKind::kSolver, std::string("maximin LP: ") + LpStatusName(res.status));
    }
    out.profile.row.assign(res.x.begin(), res.x.begin() + m);
    out.value = res.x[m];
  }
  {
    // Variables y_0..y_{n-1}, w. Minimize w with P1 y <= w per row.
    LinearProgram lp;
    lp.objective.assign(n + 1, 0.0);
    lp.objective[n] = -1.0;
    for (int r = 0; r < m; ++r) {
      RealVec row(n + 1, 0.0);
      for (int c = 0; c < n; ++c) row[c] = g.u1(r, c);
      row[n] = -1.0;
      lp.a_ub.push_back(std::move(row));
      lp.b_ub.push_back(0.0);
    }
    RealVec sum(n + 1, 1.0);
    sum[n] = 0.0;
    lp.a_eq.push_back(sum);
    lp.b_eq.push_back(1.0);
    lp.lower.assign(n + 1, 0.0);
    lp.lower[n] = -kInf;
    LpResult res = lp_solve(lp);
    if (res.status != LpStatus::kOptimal) {
      Fail(ErrorKind::kSolver, std::string("minimax LP: ") + LpStatusName(res.status));
    }
    out.profile.col.assign(res.x.begin(), res.x.begin() + n);
  }
  for (double& p : out.profile.row) p = std::max(0.0, p);
  for (double& p : out.profile.col) p = std::max(0.0, p);
  return out;
}

}  // namespace nscsg
