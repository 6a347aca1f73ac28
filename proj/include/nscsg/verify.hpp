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
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nscsg/error.hpp"
#include "nscsg/gbi.hpp"
#include "nscsg/model.hpp"
#include "nscsg/unfold.hpp"

namespace nscsg {

namespace internal {

inline void CheckDistribution(const RealVec& p, size_t size, int node, const char* what) {
  if (p.size() != size) {
    Fail(ErrorKind::kPrecondition, std::string(what) + " missing or wrong size at history " +
                                       std::to_string(node));
  }
  double total = 0.0;
  for (double q : p) {
    if (!(q >= -1e-9)) {
      Fail(ErrorKind::kPrecondition,
           std::string(what) + " has a negative entry at history " + std::to_string(node));
    }
    total += q;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    Fail(ErrorKind::kPrecondition,
         std::string(what) + " does not sum to 1 at history " + std::to_string(node));
  }
}

inline void CheckComplete(const GameGraph& g, const EquilibriumSolution& sol, bool need_marginals) {
  if (static_cast<int>(sol.strategy.size()) != g.size()) {
    Fail(ErrorKind::kPrecondition, "solution does not cover the game");
  }
  for (int id = 0; id < g.size(); ++id) {
    const GameNode& n = g.nodes[id];
    if (n.is_leaf()) continue;
    const NodeStrategy& s = sol.strategy[id];
    if (need_marginals) {
      CheckDistribution(s.row, n.num_actions(0), id, "row strategy");
      CheckDistribution(s.col, n.num_actions(1), id, "column strategy");
    } else {
      CheckDistribution(s.joint, n.num_joint(), id, "joint distribution");
    }
  }
}

// Expected accumulated reward of each agent from every node when the
// profile's joint distributions are followed.
inline std::vector<Payoff> OnPathValues(const GameGraph& g, const RewardTable& t,
                                        const std::vector<NodeStrategy>& strategy,
                                        bool use_marginals) {
  std::vector<Payoff> v(g.size(), Payoff{0.0, 0.0});
  for (int stage = g.horizon; stage >= 0; --stage) {
    for (int id : g.stages[stage]) {
      const GameNode& n = g.nodes[id];
      for (int i = 0; i < 2; ++i) v[id][i] = t.state[id][i];
      if (n.is_leaf()) continue;
      const int k = n.num_actions(1);
      for (int j = 0; j < n.num_joint(); ++j) {
        const double p = use_marginals ? strategy[id].row[j / k] * strategy[id].col[j % k]
                                       : strategy[id].joint[j];
        if (p == 0.0) continue;
        for (int i = 0; i < 2; ++i) {
          double cont = t.action[id][j][i];
          for (const Outcome& o : n.outcomes[j]) cont += o.prob * v[o.child][i];
          v[id][i] += p * cont;
        }
      }
    }
  }
  return v;
}

}  // namespace internal

// Value agent i can secure from every node by best-responding to the other
// agent's mixed strategies (which must be present as row/col marginals).
inline RealVec best_response_value(const GameGraph& g, const RewardTable& t,
                                   const EquilibriumSolution& sol, int agent) {
  RequireTwoAgents(t);
  internal::CheckComplete(g, sol, /*need_marginals=*/true);
  RealVec br(g.size(), 0.0);
  for (int stage = g.horizon; stage >= 0; --stage) {
    for (int id : g.stages[stage]) {
      const GameNode& n = g.nodes[id];
      br[id] = t.state[id][agent];
      if (n.is_leaf()) continue;
      const int m = n.num_actions(0), k = n.num_actions(1);
      const int own = agent == 0 ? m : k, opp = agent == 0 ? k : m;
      const RealVec& sigma = agent == 0 ? sol.strategy[id].col : sol.strategy[id].row;
      double best = -kInf;
      for (int a = 0; a < own; ++a) {
        double val = 0.0;
        for (int b = 0; b < opp; ++b) {
          const int j = agent == 0 ? a * k + b : b * k + a;
          double cont = t.action[id][j][agent];
          for (const Outcome& o : n.outcomes[j]) cont += o.prob * br[o.child];
          val += sigma[b] * cont;
        }
        best = std::max(best, val);
      }
      br[id] += best;
    }
  }
  return br;
}

struct VerifyReport {
  bool pass = true;
  std::vector<Payoff> gap;  // per node and agent, >= 0
  double max_gap = 0.0;
  int worst_node = -1;
  int worst_agent = -1;
  std::vector<Payoff> value;  // on-path values recomputed here
};

namespace internal {

inline void Finish(VerifyReport& r, double tol) {
  for (int id = 0; id < static_cast<int>(r.gap.size()); ++id) {
    for (int i = 0; i < 2; ++i) {
      if (r.gap[id][i] > r.max_gap) {
        r.max_gap = r.gap[id][i];
        r.worst_node = id;
        r.worst_agent = i;
      }
    }
  }
  r.pass = r.max_gap <= tol;
}

}  // namespace internal

// Subgame-perfect Nash check: at every history, no agent gains more than
// tol by any (multi-step) deviation.
inline VerifyReport check_spne(const GameGraph& g, const RewardTable& t,
                               const EquilibriumSolution& sol, double tol = 1e-6) {
  RequireTwoAgents(t);
  internal::CheckComplete(g, sol, /*need_marginals=*/true);
  VerifyReport r;
  r.value = internal::OnPathValues(g, t, sol.strategy, /*use_marginals=*/true);
  r.gap.assign(g.size(), Payoff{0.0, 0.0});
  for (int i = 0; i < 2; ++i) {
    RealVec br = best_response_value(g, t, sol, i);
    for (int id = 0; id < g.size(); ++id) {
      if (g.nodes[id].is_leaf()) continue;
      r.gap[id][i] = std::max(0.0, br[id] - r.value[id][i]);
    }
  }
  internal::Finish(r, tol);
  return r;
}

// Subgame-perfect correlated check: at every history, obeying each
// recommendation is at least as good as swapping it for another action.
inline VerifyReport check_spce(const GameGraph& g, const RewardTable& t,
                               const EquilibriumSolution& sol, double tol = 1e-6) {
  RequireTwoAgents(t);
  internal::CheckComplete(g, sol, /*need_marginals=*/false);
  VerifyReport r;
  r.value = internal::OnPathValues(g, t, sol.strategy, /*use_marginals=*/false);
  r.gap.assign(g.size(), Payoff{0.0, 0.0});
  for (int id = 0; id < g.size(); ++id) {
    const GameNode& n = g.nodes[id];
    if (n.is_leaf()) continue;
    const int m = n.num_actions(0), k = n.num_actions(1);
    auto z = [&](int j, int i) {
      double v = t.action[id][j][i] + t.state[id][i];
      for (const Outcome& o : n.outcomes[j]) v += o.prob * r.value[o.child][i];
      return v;
    };
    const RealVec& mu = sol.strategy[id].joint;
    for (int a = 0; a < m; ++a) {
      for (int a2 = 0; a2 < m; ++a2) {
        double gain = 0.0;
        for (int b = 0; b < k; ++b) gain += mu[a * k + b] * (z(a2 * k + b, 0) - z(a * k + b, 0));
        r.gap[id][0] = std::max(r.gap[id][0], gain);
      }
    }
    for (int b = 0; b < k; ++b) {
      for (int b2 = 0; b2 < k; ++b2) {
        double gain = 0.0;
        for (int a = 0; a < m; ++a) gain += mu[a * k + b] * (z(a * k + b2, 1) - z(a * k + b, 1));
        r.gap[id][1] = std::max(r.gap[id][1], gain);
      }
    }
  }
  internal::Finish(r, tol);
  return r;
}

inline VerifyReport CheckEquilibrium(const GameGraph& g, const RewardTable& t,
                                     const EquilibriumSolution& sol, double tol = 1e-6) {
  return sol.type == EquilibriumType::kNash ? check_spne(g, t, sol, tol)
                                            : check_spce(g, t, sol, tol);
}

struct SimulationStep {
  int node;
  JointAction action;
};

struct SimulationResult {
  std::vector<int> nodes;            // visited nodes, root to leaf
  std::vector<JointAction> actions;  // executed joint actions
  Path path;
  Payoff realized{0.0, 0.0};
  // Steps where an agent's executed action met the violation predicate.
  std::vector<int> violations;
  double violation_fraction = 0.0;
};

struct SimulateOptions {
  std::uint64_t seed = 0;
  // Marks an executed action as a violation; nullptr is the idle action.
  std::function<bool(int agent, const Action*)> is_violation;
};

// Seeded rollout from the root: joint actions are drawn from the profile's
// joint distribution, successors from the transition probabilities.
inline SimulationResult simulate(const NsCsg& model, const GameGraph& g, const RewardTable& t,
                                 const EquilibriumSolution& sol,
                                 const SimulateOptions& opts = {}) {
  std::mt19937_64 rng(opts.seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto draw = [&uniform](const auto& weights, auto weight_of) {
    double u = uniform(), acc = 0.0;
    int last = -1;
    for (int k = 0; k < static_cast<int>(weights.size()); ++k) {
      const double w = weight_of(weights[k]);
      if (w <= 0.0) continue;
      last = k;
      acc += w;
      if (u < acc) return k;
    }
    return last;
  };
  SimulationResult res;
  res.violations.assign(model.num_agents(), 0);
  res.path.start_stage = 0;
  int id = g.root();
  while (true) {
    const GameNode& n = g.nodes[id];
    res.nodes.push_back(id);
    res.path.states.push_back(n.state);
    for (int i = 0; i < 2 && i < t.num_agents; ++i) res.realized[i] += t.state[id][i];
    if (n.is_leaf()) break;
    if (static_cast<int>(sol.strategy.size()) <= id ||
        static_cast<int>(sol.strategy[id].joint.size()) != n.num_joint()) {
      Fail(ErrorKind::kPrecondition, "solution has no strategy at reachable history " +
                                         std::to_string(id));
    }
    const int j = draw(sol.strategy[id].joint, [](double p) { return p; });
    JointAction a = n.Joint(j);
    for (int i = 0; i < 2 && i < t.num_agents; ++i) res.realized[i] += t.action[id][j][i];
    if (opts.is_violation) {
      ResolvedJoint r = model.Resolve(a);
      for (int i = 0; i < model.num_agents(); ++i) {
        if (opts.is_violation(i, r[i])) ++res.violations[i];
      }
    }
    res.actions.push_back(a);
    res.path.actions.push_back(a);
    const int o = draw(n.outcomes[j], [](const Outcome& x) { return x.prob; });
    id = n.outcomes[j][o].child;
  }
  const int steps = res.actions.size() * model.num_agents();
  int total = 0;
  for (int v : res.violations) total += v;
  res.violation_fraction = steps == 0 ? 0.0 : static_cast<double>(total) / steps;
  return res;
}

// One line per state: "s<k> = ((loc,per),...,(env)) --(a_1,...)-->".
inline std::string FormatPath(const NsCsg& model, const SimulationResult& r) {
  std::ostringstream os;
  os.precision(9);
  auto vec = [&os](const RealVec& v) {
    for (size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
  };
  for (size_t k = 0; k < r.path.states.size(); ++k) {
    const GlobalState& s = r.path.states[k];
    os << "s" << k << " = (";
    for (int i = 0; i < model.num_agents(); ++i) {
      os << "(";
      vec(model.agent(i).local_states[s.agents[i].loc]);
      os << ";";
      vec(model.agent(i).percepts[s.agents[i].per]);
      os << "),";
    }
    os << "(";
    vec(s.env);
    os << "))";
    if (k < r.actions.size()) os << " --" << model.DescribeJoint(r.actions[k]) << "-->";
    os << "\n";
  }
  return os.str();
}

}  // namespace nscsg
