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
#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "nscsg/error.hpp"
#include "nscsg/gbi.hpp"
#include "nscsg/lp.hpp"
#include "nscsg/nfg.hpp"
#include "nscsg/unfold.hpp"

namespace nscsg {

// ---------------------------------------------------------------------------
// Values determined by a strategy profile.

struct ValueData {
  std::vector<Payoff> value;            // V per node
  std::vector<std::vector<Payoff>> z;   // Z per node and joint index
};

// Bottom-up computation of V and Z induced by `strategy` (joint
// distributions are used, so Nash and correlated profiles are treated alike).
inline ValueData evaluate_values(const GameGraph& g, const RewardTable& t,
                                 const std::vector<NodeStrategy>& strategy) {
  RequireTwoAgents(t);
  ValueData d;
  d.value.assign(g.size(), Payoff{0.0, 0.0});
  d.z.resize(g.size());
  for (int stage = g.horizon; stage >= 0; --stage) {
    for (int id : g.stages[stage]) {
      const GameNode& n = g.nodes[id];
      if (n.is_leaf()) {
        d.value[id] = {t.state[id][0], t.state[id][1]};
        continue;
      }
      const RealVec& mu = strategy.at(id).joint;
      if (static_cast<int>(mu.size()) != n.num_joint()) {
        Fail(ErrorKind::kPrecondition,
             "strategy missing or malformed at history " + std::to_string(id));
      }
      d.z[id].resize(n.num_joint());
      Payoff v{0.0, 0.0};
      for (int j = 0; j < n.num_joint(); ++j) {
        Payoff z{t.action[id][j][0] + t.state[id][0],
                 t.action[id][j][1] + t.state[id][1]};
        for (const Outcome& o : n.outcomes[j]) {
          z[0] += o.prob * d.value[o.child][0];
          z[1] += o.prob * d.value[o.child][1];
        }
        d.z[id][j] = z;
        v[0] += mu[j] * z[0];
        v[1] += mu[j] * z[1];
      }
      d.value[id] = v;
    }
  }
  return d;
}

// Largest incentive violation at one node given its Z values.
inline double IncentiveViolation(const GameNode& n, const std::vector<Payoff>& z,
                                 const NodeStrategy& s, EquilibriumType type) {
  const int m = n.num_actions(0), k = n.num_actions(1);
  double worst = 0.0;
  if (type == EquilibriumType::kNash) {
    double v1 = 0.0, v2 = 0.0;
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < k; ++b) {
        const double p = s.row[a] * s.col[b];
        v1 += p * z[a * k + b][0];
        v2 += p * z[a * k + b][1];
      }
    }
    for (int a = 0; a < m; ++a) {
      double dev = 0.0;
      for (int b = 0; b < k; ++b) dev += s.col[b] * z[a * k + b][0];
      worst = std::max(worst, dev - v1);
    }
    for (int b = 0; b < k; ++b) {
      double dev = 0.0;
      for (int a = 0; a < m; ++a) dev += s.row[a] * z[a * k + b][1];
      worst = std::max(worst, dev - v2);
    }
    return worst;
  }
  for (int a = 0; a < m; ++a) {
    for (int a2 = 0; a2 < m; ++a2) {
      if (a2 == a) continue;
      double gain = 0.0;
      for (int b = 0; b < k; ++b) {
        gain += s.joint[a * k + b] * (z[a2 * k + b][0] - z[a * k + b][0]);
      }
      worst = std::max(worst, gain);
    }
  }
  for (int b = 0; b < k; ++b) {
    for (int b2 = 0; b2 < k; ++b2) {
      if (b2 == b) continue;
      double gain = 0.0;
      for (int a = 0; a < m; ++a) {
        gain += s.joint[a * k + b] * (z[a * k + b2][1] - z[a * k + b][1]);
      }
      worst = std::max(worst, gain);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Constraint systems.

enum class VarKind { kMuNash, kMuJoint, kValue, kZ };

struct VarId {
  VarKind kind;
  int node;
  int agent;  // -1 for joint-distribution variables
  int index;  // action or joint index; -1 for values
  auto operator<=>(const VarId&) const = default;

  std::string Name() const {
    std::ostringstream os;
    switch (kind) {
      case VarKind::kMuNash:
        os << "mu" << agent + 1 << "[" << node << "," << index << "]";
        break;
      case VarKind::kMuJoint:
        os << "mu[" << node << "," << index << "]";
        break;
      case VarKind::kValue:
        os << "V" << agent + 1 << "[" << node << "]";
        break;
      case VarKind::kZ:
        os << "Z" << agent + 1 << "[" << node << "," << index << "]";
        break;
    }
    return os.str();
  }
};

struct Monomial {
  double coef;
  std::vector<int> vars;  // indices into ConstraintSystem::vars
};

enum class Relation { kEqualZero, kNonNegative };

enum class Origin {
  kNashValue,
  kNashIncentive,
  kNashSimplex,
  kCorrelatedValue,
  kCorrelatedIncentive,
  kCorrelatedSimplex,
  kNonNegativity,
  kRewardDefinition,
};

inline const char* OriginName(Origin o) {
  switch (o) {
    case Origin::kNashValue: return "ne-value";
    case Origin::kNashIncentive: return "ne-incentive";
    case Origin::kNashSimplex: return "ne-simplex";
    case Origin::kCorrelatedValue: return "ce-value";
    case Origin::kCorrelatedIncentive: return "ce-incentive";
    case Origin::kCorrelatedSimplex: return "ce-simplex";
    case Origin::kNonNegativity: return "nonneg";
    case Origin::kRewardDefinition: return "reward-def";
  }
  return "?";
}

struct Constraint {
  std::vector<Monomial> terms;
  double constant = 0.0;
  Relation relation = Relation::kEqualZero;
  Origin origin = Origin::kNashValue;
  int node = -1;

  int Degree() const {
    int d = 0;
    for (const auto& m : terms) d = std::max<int>(d, m.vars.size());
    return d;
  }

  double Evaluate(const std::vector<double>& x) const {
    double v = constant;
    for (const auto& m : terms) {
      double p = m.coef;
      for (int k : m.vars) p *= x[k];
      v += p;
    }
    return v;
  }
};

using Assignment = std::vector<double>;  // indexed like ConstraintSystem::vars

struct ConstraintSystem {
  EquilibriumType type = EquilibriumType::kNash;
  std::vector<VarId> vars;
  std::map<VarId, int> index;
  std::vector<Constraint> constraints;

  int Var(const VarId& id) {
    auto it = index.find(id);
    if (it != index.end()) return it->second;
    index.emplace(id, vars.size());
    vars.push_back(id);
    return vars.size() - 1;
  }

  int Find(const VarId& id) const {
    auto it = index.find(id);
    if (it == index.end()) Fail(ErrorKind::kPrecondition, "unknown variable " + id.Name());
    return it->second;
  }

  int MaxDegree() const {
    int d = 0;
    for (const auto& c : constraints) d = std::max(d, c.Degree());
    return d;
  }
};

namespace internal {

// Adds V and Z variables and the Z definitions for every non-leaf node.
inline void AddRewardDefinitions(ConstraintSystem& sys, const GameGraph& g,
                                 const RewardTable& t, int id) {
  const GameNode& n = g.nodes[id];
  for (int i = 0; i < 2; ++i) sys.Var({VarKind::kValue, id, i, -1});
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < n.num_joint(); ++j) {
      Constraint c;
      c.origin = Origin::kRewardDefinition;
      c.node = id;
      c.terms.push_back({1.0, {sys.Var({VarKind::kZ, id, i, j})}});
      c.constant = -(t.action[id][j][i] + t.state[id][i]);
      for (const Outcome& o : n.outcomes[j]) {
        const GameNode& child = g.nodes[o.child];
        if (child.is_leaf()) {
          c.constant -= o.prob * t.state[o.child][i];
        } else {
          c.terms.push_back({-o.prob, {sys.Var({VarKind::kValue, o.child, i, -1})}});
        }
      }
      sys.constraints.push_back(std::move(c));
    }
  }
}

inline std::vector<int> NonLeafNodes(const GameGraph& g) {
  std::vector<int> out;
  for (int id = 0; id < g.size(); ++id) {
    if (!g.nodes[id].is_leaf()) out.push_back(id);
  }
  return out;
}

}  // namespace internal

inline ConstraintSystem build_ne_system(const GameGraph& g, const RewardTable& t) {
  RequireTwoAgents(t);
  ConstraintSystem sys;
  sys.type = EquilibriumType::kNash;
  for (int id : internal::NonLeafNodes(g)) {
    const GameNode& n = g.nodes[id];
    const int m = n.num_actions(0), k = n.num_actions(1);
    std::vector<int> mu1(m), mu2(k);
    for (int a = 0; a < m; ++a) mu1[a] = sys.Var({VarKind::kMuNash, id, 0, a});
    for (int b = 0; b < k; ++b) mu2[b] = sys.Var({VarKind::kMuNash, id, 1, b});
    internal::AddRewardDefinitions(sys, g, t, id);
    auto z = [&](int i, int a, int b) { return sys.Var({VarKind::kZ, id, i, a * k + b}); };
    for (int i = 0; i < 2; ++i) {
      const int v = sys.Var({VarKind::kValue, id, i, -1});
      Constraint value;
      value.origin = Origin::kNashValue;
      value.node = id;
      value.terms.push_back({1.0, {v}});
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < k; ++b) value.terms.push_back({-1.0, {mu1[a], mu2[b], z(i, a, b)}});
      }
      sys.constraints.push_back(std::move(value));
      // One deviation constraint per own action.
      const int own = i == 0 ? m : k;
      for (int x = 0; x < own; ++x) {
        Constraint inc;
        inc.origin = Origin::kNashIncentive;
        inc.relation = Relation::kNonNegative;
        inc.node = id;
        inc.terms.push_back({1.0, {v}});
        if (i == 0) {
          for (int b = 0; b < k; ++b) inc.terms.push_back({-1.0, {mu2[b], z(0, x, b)}});
        } else {
          for (int a = 0; a < m; ++a) inc.terms.push_back({-1.0, {mu1[a], z(1, a, x)}});
        }
        sys.constraints.push_back(std::move(inc));
      }
    }
    for (const auto* mu : {&mu1, &mu2}) {
      Constraint simplex;
      simplex.origin = Origin::kNashSimplex;
      simplex.node = id;
      simplex.constant = -1.0;
      for (int v : *mu) {
        simplex.terms.push_back({1.0, {v}});
        Constraint nn;
        nn.origin = Origin::kNonNegativity;
        nn.relation = Relation::kNonNegative;
        nn.node = id;
        nn.terms.push_back({1.0, {v}});
        sys.constraints.push_back(std::move(nn));
      }
      sys.constraints.push_back(std::move(simplex));
    }
  }
  return sys;
}

inline ConstraintSystem build_ce_system(const GameGraph& g, const RewardTable& t) {
  RequireTwoAgents(t);
  ConstraintSystem sys;
  sys.type = EquilibriumType::kCorrelated;
  for (int id : internal::NonLeafNodes(g)) {
    const GameNode& n = g.nodes[id];
    const int m = n.num_actions(0), k = n.num_actions(1);
    std::vector<int> mu(m * k);
    for (int j = 0; j < m * k; ++j) mu[j] = sys.Var({VarKind::kMuJoint, id, -1, j});
    internal::AddRewardDefinitions(sys, g, t, id);
    auto z = [&](int i, int a, int b) { return sys.Var({VarKind::kZ, id, i, a * k + b}); };
    for (int i = 0; i < 2; ++i) {
      Constraint value;
      value.origin = Origin::kCorrelatedValue;
      value.node = id;
      value.terms.push_back({1.0, {sys.Var({VarKind::kValue, id, i, -1})}});
      for (int j = 0; j < m * k; ++j) value.terms.push_back({-1.0, {mu[j], z(i, j / k, j % k)}});
      sys.constraints.push_back(std::move(value));
    }
    for (int a = 0; a < m; ++a) {
      for (int a2 = 0; a2 < m; ++a2) {
        if (a2 == a) continue;
        Constraint inc;
        inc.origin = Origin::kCorrelatedIncentive;
        inc.relation = Relation::kNonNegative;
        inc.node = id;
        for (int b = 0; b < k; ++b) {
          inc.terms.push_back({1.0, {mu[a * k + b], z(0, a, b)}});
          inc.terms.push_back({-1.0, {mu[a * k + b], z(0, a2, b)}});
        }
        sys.constraints.push_back(std::move(inc));
      }
    }
    for (int b = 0; b < k; ++b) {
      for (int b2 = 0; b2 < k; ++b2) {
        if (b2 == b) continue;
        Constraint inc;
        inc.origin = Origin::kCorrelatedIncentive;
        inc.relation = Relation::kNonNegative;
        inc.node = id;
        for (int a = 0; a < m; ++a) {
          inc.terms.push_back({1.0, {mu[a * k + b], z(1, a, b)}});
          inc.terms.push_back({-1.0, {mu[a * k + b], z(1, a, b2)}});
        }
        sys.constraints.push_back(std::move(inc));
      }
    }
    Constraint simplex;
    simplex.origin = Origin::kCorrelatedSimplex;
    simplex.node = id;
    simplex.constant = -1.0;
    for (int v : mu) {
      simplex.terms.push_back({1.0, {v}});
      Constraint nn;
      nn.origin = Origin::kNonNegativity;
      nn.relation = Relation::kNonNegative;
      nn.node = id;
      nn.terms.push_back({1.0, {v}});
      sys.constraints.push_back(std::move(nn));
    }
    sys.constraints.push_back(std::move(simplex));
  }
  return sys;
}

inline ConstraintSystem BuildSystem(const GameGraph& g, const RewardTable& t,
                                    EquilibriumType type) {
  return type == EquilibriumType::kNash ? build_ne_system(g, t) : build_ce_system(g, t);
}

struct ProgramSize {
  long long variables = 0;
  long long variables_without_z = 0;
  long long constraints = 0;            // Z definitions included
  long long constraints_without_z = 0;
  std::map<Origin, long long> by_origin;
};

inline ProgramSize program_size(const ConstraintSystem& sys) {
  ProgramSize s;
  s.variables = sys.vars.size();
  for (const auto& v : sys.vars) {
    if (v.kind != VarKind::kZ) ++s.variables_without_z;
  }
  s.constraints = sys.constraints.size();
  for (const auto& c : sys.constraints) {
    ++s.by_origin[c.origin];
    if (c.origin != Origin::kRewardDefinition) ++s.constraints_without_z;
  }
  return s;
}

// Assignment induced by a strategy profile: its mu, plus V and Z from
// evaluate_values.
inline Assignment InducedAssignment(const ConstraintSystem& sys, const GameGraph& g,
                                    const RewardTable& t,
                                    const std::vector<NodeStrategy>& strategy) {
  ValueData d = evaluate_values(g, t, strategy);
  Assignment x(sys.vars.size(), 0.0);
  for (size_t k = 0; k < sys.vars.size(); ++k) {
    const VarId& v = sys.vars[k];
    switch (v.kind) {
      case VarKind::kMuNash:
        x[k] = (v.agent == 0 ? strategy[v.node].row : strategy[v.node].col).at(v.index);
        break;
      case VarKind::kMuJoint:
        x[k] = strategy[v.node].joint.at(v.index);
        break;
      case VarKind::kValue:
        x[k] = d.value[v.node][v.agent];
        break;
      case VarKind::kZ:
        x[k] = d.z[v.node][v.index][v.agent];
        break;
    }
  }
  return x;
}

struct FeasibilityReport {
  double max_equality_residual = 0.0;
  double max_inequality_violation = 0.0;
  int worst_constraint = -1;
  bool feasible = true;
};

inline FeasibilityReport check_feasibility(const ConstraintSystem& sys,
                                           const Assignment& x, double tol) {
  if (x.size() != sys.vars.size()) {
    Fail(ErrorKind::kDimension, "assignment does not cover the system");
  }
  FeasibilityReport r;
  double worst = 0.0;
  for (size_t k = 0; k < sys.constraints.size(); ++k) {
    const Constraint& c = sys.constraints[k];
    const double v = c.Evaluate(x);
    double bad;
    if (c.relation == Relation::kEqualZero) {
      bad = std::abs(v);
      r.max_equality_residual = std::max(r.max_equality_residual, bad);
    } else {
      bad = std::max(0.0, -v);
      r.max_inequality_violation = std::max(r.max_inequality_violation, bad);
    }
    if (bad > worst) {
      worst = bad;
      r.worst_constraint = k;
    }
  }
  r.feasible = r.max_equality_residual <= tol && r.max_inequality_violation <= tol;
  return r;
}

// One constraint per line: "<origin> h<node>: c*x*y + ... (= | >=) 0".
inline std::string DumpSystem(const ConstraintSystem& sys) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& c : sys.constraints) {
    os << OriginName(c.origin) << " h" << c.node << ": ";
    bool first = true;
    for (const auto& m : c.terms) {
      os << (first ? "" : " + ") << m.coef;
      for (int v : m.vars) os << "*" << sys.vars[v].Name();
      first = false;
    }
    if (c.constant != 0.0 || first) os << (first ? "" : " + ") << c.constant;
    os << (c.relation == Relation::kEqualZero ? " = 0" : " >= 0") << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Exhaustive search over grid strategies.

struct GridOptions {
  int resolution = 5;
  double tol = -1.0;  // negative: 0.5 / resolution
  // Without a base, the backward-induction profile is added at every node
  // so the family always contains an exact equilibrium.
  bool seed_with_gbi = true;
  long long max_combinations = 50'000'000;
  // Optional restriction: only nodes flagged here are searched; the others
  // keep their strategy from `base`. With a base, its strategy is also the
  // first candidate at every searched node, so the incumbent wins ties.
  const std::vector<char>* free = nullptr;
  const EquilibriumSolution* base = nullptr;
};

struct GridResult {
  EquilibriumSolution solution;
  double welfare = 0.0;
  long long combinations = 0;
  long long feasible = 0;
};

namespace internal {

// All points of the simplex with n coordinates in multiples of 1/d, first
// coordinate largest first.
inline std::vector<RealVec> SimplexGrid(int n, int d) {
  std::vector<RealVec> out;
  std::vector<int> c(n, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n - 1) {
      c[pos] = left;
      RealVec p(n);
      for (int k = 0; k < n; ++k) p[k] = static_cast<double>(c[k]) / d;
      out.push_back(std::move(p));
      return;
    }
    for (int v = left; v >= 0; --v) {
      c[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, d);
  return out;
}

// Nodes ordered children before parents: stage descending, id ascending.
inline std::vector<int> BottomUpOrder(const GameGraph& g) {
  std::vector<int> out;
  for (int stage = g.horizon; stage >= 0; --stage) {
    for (int id : g.stages[stage]) {
      if (!g.nodes[id].is_leaf()) out.push_back(id);
    }
  }
  return out;
}

}  // namespace internal

// Welfare-maximizing subgame-perfect profile among all profiles whose
// probabilities are multiples of 1/d (plus the backward-induction choice at
// each node, see GridOptions), with incentive constraints relaxed by the
// grid tolerance. Ties keep the first profile in enumeration order,
// where the deepest node varies slowest.
inline std::optional<GridResult> solve_exact_grid(const GameGraph& g, const RewardTable& t,
                                                  EquilibriumType type,
                                                  const GridOptions& opts = {}) {
  RequireTwoAgents(t);
  const int d = opts.resolution;
  if (d < 1) Fail(ErrorKind::kPrecondition, "grid resolution must be >= 1");
  const double tol = opts.tol < 0 ? 0.5 / d : opts.tol;
  const std::vector<int> order = internal::BottomUpOrder(g);
  std::vector<std::vector<NodeStrategy>> choices(order.size());
  EquilibriumSolution seed;
  if (!opts.base && opts.seed_with_gbi) seed = run_gbi(g, t, type);
  double combos = 1.0;
  for (size_t p = 0; p < order.size(); ++p) {
    const GameNode& n = g.nodes[order[p]];
    if (opts.base) {
      const NodeStrategy& incumbent = opts.base->strategy.at(order[p]);
      choices[p].push_back(incumbent);
      if (opts.free && !(*opts.free)[order[p]]) continue;
    } else if (opts.seed_with_gbi) {
      choices[p].push_back(seed.strategy[order[p]]);
    }
    if (type == EquilibriumType::kNash) {
      auto rows = internal::SimplexGrid(n.num_actions(0), d);
      auto cols = internal::SimplexGrid(n.num_actions(1), d);
      for (const auto& r : rows) {
        for (const auto& c : cols) {
          choices[p].push_back({r, c, ProductDistribution(r, c)});
        }
      }
    } else {
      for (auto& j : internal::SimplexGrid(n.num_joint(), d)) {
        choices[p].push_back({{}, {}, std::move(j)});
      }
    }
    combos *= choices[p].size();
    if (combos > static_cast<double>(opts.max_combinations)) {
      Fail(ErrorKind::kResource, "grid search exceeds " +
                                     std::to_string(opts.max_combinations) +
                                     " combinations");
    }
  }

  GridResult res;
  std::vector<NodeStrategy> strategy(g.size());
  std::vector<Payoff> value(g.size(), Payoff{0.0, 0.0});
  for (int id = 0; id < g.size(); ++id) {
    if (g.nodes[id].is_leaf()) value[id] = {t.state[id][0], t.state[id][1]};
  }
  std::vector<int> digit(order.size(), 0);
  std::vector<char> ok(order.size(), 1);
  std::vector<std::vector<Payoff>> z(g.size());
  // Recomputes values and incentive flags from position `from` onwards.
  auto recompute = [&](size_t from) {
    for (size_t p = from; p < order.size(); ++p) {
      const int id = order[p];
      const GameNode& n = g.nodes[id];
      const NodeStrategy& s = choices[p][digit[p]];
      z[id].resize(n.num_joint());
      Payoff v{0.0, 0.0};
      for (int j = 0; j < n.num_joint(); ++j) {
        Payoff zz{t.action[id][j][0] + t.state[id][0], t.action[id][j][1] + t.state[id][1]};
        for (const Outcome& o : n.outcomes[j]) {
          zz[0] += o.prob * value[o.child][0];
          zz[1] += o.prob * value[o.child][1];
        }
        z[id][j] = zz;
        v[0] += s.joint[j] * zz[0];
        v[1] += s.joint[j] * zz[1];
      }
      value[id] = v;
      ok[p] = IncentiveViolation(n, z[id], s, type) <= tol;
    }
  };
  bool found = false;
  std::vector<int> best_digit;
  double best = -kInf;
  size_t changed = 0;
  while (true) {
    recompute(changed);
    ++res.combinations;
    if (std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; })) {
      ++res.feasible;
      const double sw = value[0][0] + value[0][1];
      if (!found || sw > best + 1e-12) {
        found = true;
        best = sw;
        best_digit = digit;
      }
    }
    // Odometer step: the last position (the root) varies fastest.
    int p = static_cast<int>(order.size()) - 1;
    while (p >= 0 && digit[p] + 1 == static_cast<int>(choices[p].size())) {
      digit[p] = 0;
      --p;
    }
    if (p < 0) break;
    ++digit[p];
    changed = p;
  }
  if (!found) return std::nullopt;
  res.solution.type = type;
  res.solution.strategy.assign(g.size(), {});
  for (size_t p = 0; p < order.size(); ++p) {
    res.solution.strategy[order[p]] = choices[p][best_digit[p]];
  }
  res.solution.value = evaluate_values(g, t, res.solution.strategy).value;
  res.welfare = res.solution.value[0][0] + res.solution.value[0][1];
  return res;
}

// ---------------------------------------------------------------------------
// Feasible block-coordinate ascent on the welfare program.

struct CoordinateAscentOptions {
  int rounds = 10;
  double tol = 1e-9;               // minimum accepted welfare gain
  double feasibility_tol = 1e-7;   // incentive slack allowed after a step
};

struct CoordinateAscentResult {
  EquilibriumSolution solution;
  double initial_welfare = 0.0;
  double welfare = 0.0;
  int accepted = 0;
  int lp_solves = 0;
};

// Largest incentive violation over every non-leaf node.
inline double MaxIncentiveViolation(const GameGraph& g, const ValueData& d,
                                    const std::vector<NodeStrategy>& s,
                                    EquilibriumType type) {
  double worst = 0.0;
  for (int id = 0; id < g.size(); ++id) {
    if (g.nodes[id].is_leaf()) continue;
    worst = std::max(worst, IncentiveViolation(g.nodes[id], d.z[id], s[id], type));
  }
  return worst;
}

namespace internal {

struct LinearRow {
  RealVec a;
  double b;  // a . x <= b
};

// Maximizes c.x over the simplex subject to `rows`, adding rows lazily.
inline std::optional<RealVec> SolveWithCuts(const RealVec& c,
                                            const std::vector<LinearRow>& rows,
                                            std::vector<char> active, int& solves) {
  const int n = c.size();
  for (int iter = 0; iter < 200; ++iter) {
    LinearProgram lp;
    lp.objective = c;
    for (size_t r = 0; r < rows.size(); ++r) {
      if (!active[r]) continue;
      lp.a_ub.push_back(rows[r].a);
      lp.b_ub.push_back(rows[r].b);
    }
    lp.a_eq.push_back(RealVec(n, 1.0));
    lp.b_eq.push_back(1.0);
    LpResult res = lp_solve(lp);
    ++solves;
    if (res.status != LpStatus::kOptimal) return std::nullopt;
    std::vector<std::pair<double, int>> violated;
    for (size_t r = 0; r < rows.size(); ++r) {
      if (active[r]) continue;
      double v = -rows[r].b;
      for (int k = 0; k < n; ++k) v += rows[r].a[k] * res.x[k];
      if (v > 1e-10) violated.push_back({-v, static_cast<int>(r)});
    }
    if (violated.empty()) return res.x;
    std::sort(violated.begin(), violated.end());
    for (size_t k = 0; k < violated.size() && k < 64; ++k) active[violated[k].second] = 1;
  }
  return std::nullopt;
}

}  // namespace internal

// Improves root welfare by re-optimizing one block at a time (a node's
// joint distribution for CE, one agent's mixed action for NE) at the nodes
// flagged in `free`. Each block problem is an exact LP: with everything else
// fixed, the node's values are linear in the block and every ancestor's
// values and Z entries are affine in them. Only steps that keep every
// incentive constraint satisfied and raise welfare are accepted.
inline CoordinateAscentResult coordinate_ascent_solve(
    const GameGraph& g, const RewardTable& t, EquilibriumType type,
    const std::vector<char>& free, const EquilibriumSolution& init,
    const CoordinateAscentOptions& opts = {}) {
  RequireTwoAgents(t);
  if (static_cast<int>(free.size()) != g.size()) {
    Fail(ErrorKind::kDimension, "free-set flags do not match the graph");
  }
  CoordinateAscentResult out;
  out.solution = init;
  out.solution.type = type;
  ValueData d = evaluate_values(g, t, out.solution.strategy);
  if (MaxIncentiveViolation(g, d, out.solution.strategy, type) > opts.feasibility_tol) {
    Fail(ErrorKind::kPrecondition, "coordinate ascent needs a feasible start");
  }
  out.solution.value = d.value;
  out.initial_welfare = d.value[0][0] + d.value[0][1];
  double sw = out.initial_welfare;
  const auto parents = g.Parents();
  std::vector<int> order;
  for (int id : internal::BottomUpOrder(g)) {
    if (free[id]) order.push_back(id);
  }
  std::vector<double> rho(g.size(), 0.0);
  for (int round = 0; round < opts.rounds; ++round) {
    const double round_start = sw;
    for (int n : order) {
      // Ancestors of n, children before parents.
      std::vector<int> anc = {n};
      std::vector<char> mark(g.size(), 0);
      mark[n] = 1;
      for (size_t k = 0; k < anc.size(); ++k) {
        for (int p : parents[anc[k]]) {
          if (!mark[p]) {
            mark[p] = 1;
            anc.push_back(p);
          }
        }
      }
      std::sort(anc.begin(), anc.end(), [&](int a, int b) {
        return g.nodes[a].stage != g.nodes[b].stage ? g.nodes[a].stage > g.nodes[b].stage
                                                    : a < b;
      });
      // rho[p]: probability of reaching n from p; kappa[p][j]: the same
      // after joint action j at p.
      std::map<int, RealVec> kappa;
      for (int p : anc) rho[p] = 0.0;
      rho[n] = 1.0;
      for (int p : anc) {
        if (p == n) continue;
        const GameNode& pn = g.nodes[p];
        RealVec kp(pn.num_joint(), 0.0);
        double r = 0.0;
        for (int j = 0; j < pn.num_joint(); ++j) {
          for (const Outcome& o : pn.outcomes[j]) {
            if (mark[o.child]) kp[j] += o.prob * rho[o.child];
          }
          r += out.solution.strategy[p].joint[j] * kp[j];
        }
        rho[p] = r;
        kappa[p] = std::move(kp);
      }
      const double rho_root = mark[0] ? rho[0] : 0.0;

      const GameNode& node = g.nodes[n];
      const int m = node.num_actions(0), k = node.num_actions(1);
      const int num_blocks = type == EquilibriumType::kNash ? 2 : 1;
      for (int block = 0; block < num_blocks; ++block) {
        if (rho_root <= 0.0) break;
        const NodeStrategy& cur = out.solution.strategy[n];
        const auto& z = d.z[n];
        // V_i^n = w_i . x.
        int dim;
        std::array<RealVec, 2> w;
        if (type == EquilibriumType::kCorrelated) {
          dim = m * k;
          for (int i = 0; i < 2; ++i) {
            w[i].resize(dim);
            for (int j = 0; j < dim; ++j) w[i][j] = z[j][i];
          }
        } else if (block == 0) {
          dim = m;
          for (int i = 0; i < 2; ++i) {
            w[i].assign(dim, 0.0);
            for (int a = 0; a < m; ++a) {
              for (int b = 0; b < k; ++b) w[i][a] += cur.col[b] * z[a * k + b][i];
            }
          }
        } else {
          dim = k;
          for (int i = 0; i < 2; ++i) {
            w[i].assign(dim, 0.0);
            for (int b = 0; b < k; ++b) {
              for (int a = 0; a < m; ++a) w[i][b] += cur.row[a] * z[a * k + b][i];
            }
          }
        }
        const Payoff vn = d.value[n];
        std::vector<internal::LinearRow> rows;
        std::vector<char> active;
        const double relax = 1e-10;
        auto add = [&](RealVec a, double b, bool at_node) {
          rows.push_back({std::move(a), b + relax});
          active.push_back(at_node);
        };
        // Incentives at n.
        if (type == EquilibriumType::kCorrelated) {
          for (int a = 0; a < m; ++a) {
            for (int a2 = 0; a2 < m; ++a2) {
              if (a2 == a) continue;
              RealVec row(dim, 0.0);
              for (int b = 0; b < k; ++b) row[a * k + b] = z[a2 * k + b][0] - z[a * k + b][0];
              add(std::move(row), 0.0, true);
            }
          }
          for (int b = 0; b < k; ++b) {
            for (int b2 = 0; b2 < k; ++b2) {
              if (b2 == b) continue;
              RealVec row(dim, 0.0);
              for (int a = 0; a < m; ++a) row[a * k + b] = z[a * k + b2][1] - z[a * k + b][1];
              add(std::move(row), 0.0, true);
            }
          }
        } else {
          const int me = block, other = 1 - block;
          const int own = me == 0 ? m : k, opp = me == 0 ? k : m;
          auto zat = [&](int mine, int theirs, int i) {
            return me == 0 ? z[mine * k + theirs][i] : z[theirs * k + mine][i];
          };
          const RealVec& opp_mix = me == 0 ? cur.col : cur.row;
          // The moving agent: no own action beats the mixture.
          for (int a2 = 0; a2 < own; ++a2) {
            double dev = 0.0;
            for (int b = 0; b < opp; ++b) dev += opp_mix[b] * zat(a2, b, me);
            RealVec row(dim);
            for (int a = 0; a < dim; ++a) row[a] = -w[me][a];
            add(std::move(row), -dev, true);
          }
          // The fixed agent: none of its actions beats its mixture.
          for (int b2 = 0; b2 < opp; ++b2) {
            RealVec row(dim);
            for (int a = 0; a < dim; ++a) row[a] = zat(a, b2, other) - w[other][a];
            add(std::move(row), 0.0, true);
          }
        }
        // Incentives at the ancestors, with d_i = w_i . x - V_i^n.
        for (int p : anc) {
          if (p == n) continue;
          const GameNode& pn = g.nodes[p];
          const NodeStrategy& sp = out.solution.strategy[p];
          const auto& zp = d.z[p];
          const RealVec& kp = kappa[p];
          const int pm = pn.num_actions(0), pk = pn.num_actions(1);
          // coef * d_i <= rhs becomes (coef w_i) . x <= rhs + coef V_i^n.
          auto add_affine = [&](int i, double coef, double rhs) {
            if (std::abs(coef) < 1e-15) return;
            RealVec row(dim);
            for (int a = 0; a < dim; ++a) row[a] = coef * w[i][a];
            add(std::move(row), rhs + coef * vn[i], false);
          };
          if (type == EquilibriumType::kNash) {
            const Payoff vp = d.value[p];
            for (int a2 = 0; a2 < pm; ++a2) {
              double dev = 0.0, dk = 0.0;
              for (int b = 0; b < pk; ++b) {
                dev += sp.col[b] * zp[a2 * pk + b][0];
                dk += sp.col[b] * kp[a2 * pk + b];
              }
              add_affine(0, dk - rho[p], vp[0] - dev);
            }
            for (int b2 = 0; b2 < pk; ++b2) {
              double dev = 0.0, dk = 0.0;
              for (int a = 0; a < pm; ++a) {
                dev += sp.row[a] * zp[a * pk + b2][1];
                dk += sp.row[a] * kp[a * pk + b2];
              }
              add_affine(1, dk - rho[p], vp[1] - dev);
            }
          } else {
            for (int a = 0; a < pm; ++a) {
              for (int a2 = 0; a2 < pm; ++a2) {
                if (a2 == a) continue;
                double c0 = 0.0, dk = 0.0;
                for (int b = 0; b < pk; ++b) {
                  const double mu = sp.joint[a * pk + b];
                  c0 += mu * (zp[a2 * pk + b][0] - zp[a * pk + b][0]);
                  dk += mu * (kp[a2 * pk + b] - kp[a * pk + b]);
                }
                add_affine(0, dk, -c0);
              }
            }
            for (int b = 0; b < pk; ++b) {
              for (int b2 = 0; b2 < pk; ++b2) {
                if (b2 == b) continue;
                double c0 = 0.0, dk = 0.0;
                for (int a = 0; a < pm; ++a) {
                  const double mu = sp.joint[a * pk + b];
                  c0 += mu * (zp[a * pk + b2][1] - zp[a * pk + b][1]);
                  dk += mu * (kp[a * pk + b2] - kp[a * pk + b]);
                }
                add_affine(1, dk, -c0);
              }
            }
          }
        }
        RealVec obj(dim);
        for (int a = 0; a < dim; ++a) obj[a] = rho_root * (w[0][a] + w[1][a]);
        auto x = internal::SolveWithCuts(obj, rows, active, out.lp_solves);
        if (!x) continue;
        double gain = -rho_root * (vn[0] + vn[1]);
        for (int a = 0; a < dim; ++a) gain += obj[a] * (*x)[a];
        if (gain <= opts.tol) continue;
        RealVec mix = *x;
        double total = 0.0;
        for (double& p : mix) {
          p = std::max(0.0, p);
          total += p;
        }
        for (double& p : mix) p /= total;
        std::vector<NodeStrategy> trial = out.solution.strategy;
        NodeStrategy& s = trial[n];
        if (type == EquilibriumType::kCorrelated) {
          s.joint = mix;
        } else {
          (block == 0 ? s.row : s.col) = mix;
          s.joint = ProductDistribution(s.row, s.col);
        }
        ValueData nd = evaluate_values(g, t, trial);
        const double nsw = nd.value[0][0] + nd.value[0][1];
        if (nsw <= sw + opts.tol ||
            MaxIncentiveViolation(g, nd, trial, type) > opts.feasibility_tol) {
          continue;
        }
        out.solution.strategy = std::move(trial);
        d = std::move(nd);
        sw = nsw;
        ++out.accepted;
      }
    }
    if (sw - round_start <= opts.tol) break;
  }
  out.solution.value = d.value;
  out.welfare = sw;
  return out;
}

}  // namespace nscsg
