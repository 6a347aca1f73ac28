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

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "json.hpp"
#include "nscsg/error.hpp"
#include "nscsg/model.hpp"
#include "nscsg/nfg.hpp"
#include "nscsg/parallel.hpp"
#include "nscsg/unfold.hpp"

namespace nscsg {

using Payoff = std::array<double, 2>;

// Strategy at one node. `joint` is always filled; `row`/`col` only for Nash
// equilibria. Empty at leaves.
struct NodeStrategy {
  RealVec row, col, joint;
};

struct EquilibriumSolution {
  EquilibriumType type = EquilibriumType::kNash;
  std::vector<NodeStrategy> strategy;
  std::vector<Payoff> value;
};

inline void RequireTwoAgents(const RewardTable& t) {
  if (t.num_agents != 2) {
    Fail(ErrorKind::kPrecondition, "solvers support exactly two agents");
  }
}

// Stage game at `node`: Z_i(alpha) = r_i^A + r_i^S + sum_c p(c) V_i(c).
inline BimatrixGame InducedGame(const GameGraph& g, const RewardTable& t,
                                const std::vector<Payoff>& value, int node) {
  const GameNode& n = g.nodes[node];
  BimatrixGame game(n.num_actions(0), n.num_actions(1));
  for (int j = 0; j < n.num_joint(); ++j) {
    double z1 = t.action[node][j][0] + t.state[node][0];
    double z2 = t.action[node][j][1] + t.state[node][1];
    for (const Outcome& o : n.outcomes[j]) {
      z1 += o.prob * value[o.child][0];
      z2 += o.prob * value[o.child][1];
    }
    game.p1[j] = z1;
    game.p2[j] = z2;
  }
  return game;
}

inline NodeStrategy ToNodeStrategy(const StageEquilibrium& e) {
  return NodeStrategy{e.row, e.col, e.joint};
}

struct GbiOptions {
  SelectionPolicy policy = SelectionPolicy::kSwOptimal;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Backward induction solving every stage game for a (welfare-optimal by
// default) Nash or correlated equilibrium.
inline EquilibriumSolution run_gbi(const GameGraph& g, const RewardTable& t,
                                   EquilibriumType type,
                                   const GbiOptions& opts = {}) {
  RequireTwoAgents(t);
  EquilibriumSolution sol;
  sol.type = type;
  sol.strategy.resize(g.size());
  sol.value.assign(g.size(), Payoff{0.0, 0.0});
  for (int stage = g.horizon; stage >= 0; --stage) {
    const auto& ids = g.stages[stage];
    ParallelFor(ids.size(), opts.threads, [&](int k) {
      const int id = ids[k];
      const GameNode& n = g.nodes[id];
      if (n.is_leaf()) {
        sol.value[id] = {t.state[id][0], t.state[id][1]};
        return;
      }
      BimatrixGame game = InducedGame(g, t, sol.value, id);
      std::mt19937_64 rng(opts.seed * 0x9E3779B97F4A7C15ULL + id);
      StageEquilibrium e = any_equilibrium(game, type, opts.policy, &rng);
      sol.strategy[id] = ToNodeStrategy(e);
      sol.value[id] = e.payoff;
    });
  }
  return sol;
}

// Zero-sum baseline: agent 1 maximizes its own reward, agent 2 minimizes it.
// Values are reported as (v, -v).
inline EquilibriumSolution run_minimax(const GameGraph& g, const RewardTable& t,
                                       int threads = 1) {
  RequireTwoAgents(t);
  EquilibriumSolution sol;
  sol.type = EquilibriumType::kNash;
  sol.strategy.resize(g.size());
  sol.value.assign(g.size(), Payoff{0.0, 0.0});
  for (int stage = g.horizon; stage >= 0; --stage) {
    const auto& ids = g.stages[stage];
    ParallelFor(ids.size(), threads, [&](int k) {
      const int id = ids[k];
      const GameNode& n = g.nodes[id];
      if (n.is_leaf()) {
        sol.value[id] = {t.state[id][0], -t.state[id][0]};
        return;
      }
      BimatrixGame game(n.num_actions(0), n.num_actions(1));
      for (int j = 0; j < n.num_joint(); ++j) {
        double z = t.action[id][j][0] + t.state[id][0];
        for (const Outcome& o : n.outcomes[j]) z += o.prob * sol.value[o.child][0];
        game.p1[j] = z;
        game.p2[j] = -z;
      }
      ZeroSumSolution zs = zero_sum_value(game);
      NodeStrategy s;
      s.row = zs.profile.row;
      s.col = zs.profile.col;
      s.joint = ProductDistribution(s.row, s.col);
      sol.strategy[id] = std::move(s);
      sol.value[id] = {zs.value, -zs.value};
    });
  }
  return sol;
}

inline double social_welfare(const EquilibriumSolution& sol, int node) {
  if (node < 0 || node >= static_cast<int>(sol.value.size())) {
    Fail(ErrorKind::kPrecondition, "unknown history " + std::to_string(node));
  }
  return sol.value[node][0] + sol.value[node][1];
}

}  // namespace nscsg
