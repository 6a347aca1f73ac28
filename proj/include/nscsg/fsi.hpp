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
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "nscsg/error.hpp"
#include "nscsg/gbi.hpp"
#include "nscsg/nfg.hpp"
#include "nscsg/speprog.hpp"
#include "nscsg/unfold.hpp"

namespace nscsg {

enum class HistoryPolicy { kUniformLastStage, kMaxWelfare };

// kReselect searches over alternative stage-game equilibria at the free
// nodes, re-solving the free ancestors of each changed node for welfare.
enum class FsiSolver { kCoordinateAscent, kGrid, kReselect };

struct FsiConfig {
  int m_max = 10;
  HistoryPolicy policy = HistoryPolicy::kUniformLastStage;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  FsiSolver solver = FsiSolver::kCoordinateAscent;
  int rounds = 10;
  int grid_resolution = 5;
  SelectionPolicy init_policy = SelectionPolicy::kSwOptimal;
  double feasibility_tol = 1e-7;
  double improvement_tol = 1e-9;
  int threads = 1;
  // Called with every iterate, the initial one included.
  std::function<void(int iteration, const EquilibriumSolution&)> on_iteration;
};

struct FsiTraceRow {
  int iteration = 0;
  double welfare = 0.0;
  int history = -1;
  std::string status;
};

struct FsiResult {
  EquilibriumSolution solution;
  std::vector<FsiTraceRow> trace;
};

namespace internal {

inline double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int UniformIndex(std::mt19937_64& rng, int n) {
  return static_cast<int>(Uniform01(rng) * n) % n;
}

}  // namespace internal

inline int sample_history_uniform(const std::vector<int>& histories, std::mt19937_64& rng) {
  if (histories.empty()) Fail(ErrorKind::kPrecondition, "no history to sample");
  return histories[internal::UniformIndex(rng, histories.size())];
}

// Walk from the root to stage K-1, moving to a welfare-maximizing successor
// with probability 1 - epsilon and to a uniform successor otherwise.
inline int select_history_max_sw(const GameGraph& g, const EquilibriumSolution& sol,
                                 double epsilon, std::mt19937_64& rng) {
  if (g.horizon < 1) Fail(ErrorKind::kPrecondition, "horizon 0 has no stage K-1");
  int h = g.root();
  while (g.nodes[h].stage < g.horizon - 1) {
    std::vector<int> next = g.succ(h);
    double best = -kInf;
    for (int c : next) best = std::max(best, social_welfare(sol, c));
    std::vector<int> argmax;
    for (int c : next) {
      if (social_welfare(sol, c) >= best - 1e-9) argmax.push_back(c);
    }
    const int greedy = argmax[internal::UniformIndex(rng, argmax.size())];
    h = internal::Uniform01(rng) > epsilon ? greedy
                                           : next[internal::UniformIndex(rng, next.size())];
  }
  return h;
}

struct Partition {
  std::vector<int> free;
  std::vector<int> frozen;
};

// Free nodes are those lying on some history that reaches `h`: its prefixes
// in a tree, every node that can reach it in a region graph.
inline Partition freeze_partition(const GameGraph& g, int h) {
  Partition p;
  p.free = g.Ancestors(h);
  std::vector<char> mark(g.size(), 0);
  for (int n : p.free) mark[n] = 1;
  for (int n = 0; n < g.size(); ++n) {
    if (!mark[n]) p.frozen.push_back(n);
  }
  return p;
}

struct ReselectResult {
  EquilibriumSolution solution;
  double welfare = 0.0;
  int accepted = 0;
};

// Tries every candidate equilibrium at each free node (bottom-up); after a
// change, free ancestors whose stage game changed are re-solved for welfare.
// A trial is kept when it stays subgame perfect and raises root welfare.
inline ReselectResult ReselectSolve(const GameGraph& g, const RewardTable& t,
                                    EquilibriumType type, const std::vector<char>& free,
                                    const EquilibriumSolution& init, double feasibility_tol,
                                    double tol, int max_passes = 3) {
  ReselectResult out;
  out.solution = init;
  ValueData d = evaluate_values(g, t, out.solution.strategy);
  double sw = d.value[0][0] + d.value[0][1];
  const auto parents = g.Parents();
  std::vector<int> order;
  for (int id : internal::BottomUpOrder(g)) {
    if (free[id]) order.push_back(id);
  }
  auto select = [type](const BimatrixGame& game) {
    return type == EquilibriumType::kNash ? FromNash(swne(game)) : FromCorrelated(swce(game));
  };
  for (int pass = 0; pass < max_passes; ++pass) {
    bool improved = false;
    for (int n : order) {
      // Strict ancestors of n, children first.
      std::vector<int> anc;
      std::vector<char> mark(g.size(), 0);
      std::vector<int> stack = {n};
      while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int p : parents[x]) {
          if (!mark[p]) {
            mark[p] = 1;
            anc.push_back(p);
            stack.push_back(p);
          }
        }
      }
      std::sort(anc.begin(), anc.end(), [&](int a, int b) {
        return g.nodes[a].stage != g.nodes[b].stage ? g.nodes[a].stage > g.nodes[b].stage
                                                    : a < b;
      });
      const auto candidates = CandidateEquilibria(InducedGame(g, t, d.value, n), type);
      for (const StageEquilibrium& e : candidates) {
        if (internal::NearlyEqual(e.joint, out.solution.strategy[n].joint, 1e-9)) continue;
        std::vector<NodeStrategy> trial = out.solution.strategy;
        std::vector<Payoff> vals = d.value;
        std::vector<char> changed(g.size(), 0);
        trial[n] = ToNodeStrategy(e);
        vals[n] = e.payoff;
        changed[n] = 1;
        for (int p : anc) {
          bool dirty = false;
          for (int c : g.succ(p)) dirty = dirty || changed[c];
          if (!dirty) continue;
          BimatrixGame game = InducedGame(g, t, vals, p);
          if (free[p]) {
            StageEquilibrium s = select(game);
            trial[p] = ToNodeStrategy(s);
            vals[p] = s.payoff;
          } else {
            vals[p] = ExpectedPayoff(game, trial[p].joint);
          }
          changed[p] = 1;
        }
        if (vals[0][0] + vals[0][1] <= sw + tol) continue;
        ValueData nd = evaluate_values(g, t, trial);
        const double nsw = nd.value[0][0] + nd.value[0][1];
        if (nsw <= sw + tol ||
            MaxIncentiveViolation(g, nd, trial, type) > feasibility_tol) {
          continue;
        }
        out.solution.strategy = std::move(trial);
        d = std::move(nd);
        sw = nsw;
        ++out.accepted;
        improved = true;
        break;  // candidates at n were computed for the old values
      }
    }
    if (!improved) break;
  }
  out.solution.value = d.value;
  out.welfare = sw;
  return out;
}

// Frozen subgame improvement: start from backward induction, then
// repeatedly pick a stage K-1 history, freeze everything off it and
// re-optimize what remains for welfare.
inline FsiResult run_fsi(const GameGraph& g, const RewardTable& t, EquilibriumType type,
                         const FsiConfig& cfg = {}) {
  if (cfg.m_max < 0) Fail(ErrorKind::kPrecondition, "m_max must be >= 0");
  if (cfg.epsilon < 0.0 || cfg.epsilon > 1.0) {
    Fail(ErrorKind::kPrecondition, "epsilon must be in [0,1]");
  }
  FsiResult res;
  GbiOptions gopts;
  gopts.policy = cfg.init_policy;
  gopts.seed = cfg.seed;
  gopts.threads = cfg.threads;
  res.solution = run_gbi(g, t, type, gopts);
  double sw = social_welfare(res.solution, g.root());
  res.trace.push_back({0, sw, -1, "init"});
  if (cfg.on_iteration) cfg.on_iteration(0, res.solution);
  if (g.horizon < 1) return res;
  std::mt19937_64 rng(cfg.seed);
  const std::vector<int>& last_stage = g.stages[g.horizon - 1];
  for (int m = 1; m <= cfg.m_max; ++m) {
    const int h = cfg.policy == HistoryPolicy::kUniformLastStage
                      ? sample_history_uniform(last_stage, rng)
                      : select_history_max_sw(g, res.solution, cfg.epsilon, rng);
    std::vector<char> free(g.size(), 0);
    for (int n : freeze_partition(g, h).free) free[n] = 1;
    EquilibriumSolution next;
    std::string status;
    try {
      switch (cfg.solver) {
        case FsiSolver::kCoordinateAscent: {
          CoordinateAscentOptions o;
          o.rounds = cfg.rounds;
          o.tol = cfg.improvement_tol;
          o.feasibility_tol = cfg.feasibility_tol;
          next = coordinate_ascent_solve(g, t, type, free, res.solution, o).solution;
          break;
        }
        case FsiSolver::kGrid: {
          GridOptions o;
          o.resolution = cfg.grid_resolution;
          o.tol = cfg.feasibility_tol;
          o.free = &free;
          o.base = &res.solution;
          auto r = solve_exact_grid(g, t, type, o);
          next = r ? r->solution : res.solution;
          break;
        }
        case FsiSolver::kReselect:
          next = ReselectSolve(g, t, type, free, res.solution, cfg.feasibility_tol,
                               cfg.improvement_tol)
                     .solution;
          break;
      }
      const double nsw = social_welfare(next, g.root());
      if (nsw > sw + cfg.improvement_tol) {
        res.solution = std::move(next);
        sw = nsw;
        status = "improved";
      } else {
        status = "unchanged";
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kSolver && e.kind() != ErrorKind::kResource) throw;
      status = "solver-failed";
    }
    res.trace.push_back({m, sw, h, status});
    if (cfg.on_iteration) cfg.on_iteration(m, res.solution);
  }
  return res;
}

}  // namespace nscsg
