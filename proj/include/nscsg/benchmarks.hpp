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
#include <cstdio>
#include <tuple>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nscsg/error.hpp"
#include "nscsg/model.hpp"
#include "nscsg/nn.hpp"
#include "nscsg/unfold.hpp"

namespace nscsg {

// ---------------------------------------------------------------------------
// Two-stage game whose welfare-greedy backward induction is not optimal.
//
// Node ids: 1 root; 2..5 after (U,L), (U,R), (D,L), (D,R); 6..9 after the
// same joint actions at node 4; 10, 11, 12 the idle continuations of nodes
// 2, 3 and 5. The id is the single environment variable and also each
// agent's local state, so availability can see it.

struct CounterexampleParams {
  double phi = -10.0;
};

inline int CounterexampleNodeId(const GlobalState& s) {
  return static_cast<int>(std::lround(s.env.at(0)));
}

inline GameInstance build_counterexample(const CounterexampleParams& p) {
  constexpr int kNumIds = 12;
  auto next_id = [](int id, const ResolvedJoint& a) {
    if (a[0] == nullptr) {
      switch (id) {
        case 2: return 10;
        case 3: return 11;
        case 5: return 12;
        default: return id;
      }
    }
    const int offset = (a[0]->label == "U" ? 0 : 2) + (a[1]->label == "L" ? 0 : 1);
    if (id == 1) return 2 + offset;
    if (id == 4) return 6 + offset;
    return id;
  };
  std::vector<AgentSpec> agents(2);
  const std::array<std::array<std::string, 2>, 2> labels = {
      {{"U", "D"}, {"L", "R"}}};
  for (int i = 0; i < 2; ++i) {
    AgentSpec& a = agents[i];
    a.name = i == 0 ? "row" : "column";
    for (int id = 1; id <= kNumIds; ++id) a.local_states.push_back({double(id)});
    a.percepts = {{0.0}};
    a.actions = {{labels[i][0], {}}, {labels[i][1], {}}};
    a.availability = [](const LocalView& v) {
      const int id = v.loc + 1;
      return (id == 1 || id == 4) ? std::vector<int>{0, 1} : std::vector<int>{};
    };
    a.local_transition = [next_id](const LocalView& v, const ResolvedJoint& j) {
      return std::vector<std::pair<int, double>>{{next_id(v.loc + 1, j) - 1, 1.0}};
    };
  }
  GameInstance inst;
  inst.model = NsCsg(std::move(agents), 1,
                     [next_id](const RealVec& env, const ResolvedJoint& j) {
                       return RealVec{double(next_id(std::lround(env[0]), j))};
                     });
  inst.initial.agents = {AgentState{0, 0}, AgentState{0, 0}};
  inst.initial.env = {1.0};
  inst.horizon = 2;
  const double phi = p.phi;
  auto terminal = [phi](int id) -> std::array<double, 2> {
    switch (id) {
      case 6: return {0.0, 8.0};
      case 9: return {5.0, 2.0};
      case 10: return {1.0, 1.0 + phi};
      case 11: return {3.0, phi};
      default: return {0.0, 0.0};
    }
  };
  for (int i = 0; i < 2; ++i) {
    RewardStructure r;
    r.state = [terminal, i](const GlobalState& s, StageInfo) {
      return terminal(CounterexampleNodeId(s))[i];
    };
    inst.rewards.push_back(std::move(r));
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Two vehicles on a 5x4 grid racing for two parking slots.

using Cell = std::array<int, 2>;  // (x, y), 1-based

struct TrafficRule {
  Cell cell;
  char direction;  // 'U', 'D', 'L' or 'R'
  bool operator<(const TrafficRule& o) const {
    return std::tie(cell, direction) < std::tie(o.cell, o.direction);
  }
};

struct ParkingParams {
  int columns = 5;  // x range
  int rows = 4;     // y range
  std::vector<Cell> slots = {{2, 4}, {5, 1}};
  Cell start1 = {3, 1};
  Cell start2 = {2, 2};
  Cell bonus_cell = {1, 2};
  double bonus = 5.5;
  int bonus_last_stage = 1;
  double collision_reward = -20.0;
  double step_reward = -1.0;
  std::vector<Cell> red = {{1, 1}, {1, 4}, {2, 1}, {4, 1}, {4, 4}, {5, 4}};
  std::set<TrafficRule> forbidden = DefaultTrafficRules();
  int reward_structure = 2;  // 1: time only, 2: with the bonus cell
  int horizon = 8;
  bool parked_is_absorbing = true;
  // Whether the stage-K state reward is collected. Off by default: the
  // published reward sums accumulate K steps from the initial state.
  bool count_terminal_reward = false;

  // Row y=3 is rightward only, row y=2 leftward only.
  static std::set<TrafficRule> DefaultTrafficRules() {
    std::set<TrafficRule> rules;
    for (int x = 1; x <= 5; ++x) {
      rules.insert({{x, 3}, 'L'});
      rules.insert({{x, 2}, 'R'});
    }
    return rules;
  }
};

inline Cell Displacement(char d) {
  switch (d) {
    case 'U': return {0, 1};
    case 'D': return {0, -1};
    case 'L': return {-1, 0};
    case 'R': return {1, 0};
  }
  Fail(ErrorKind::kModel, std::string("unknown direction ") + d);
}

// Vehicle 1 makes two unit moves per step, vehicle 2 one.
inline std::vector<std::string> ParkingActionLabels(int vehicle) {
  const std::string dirs = "UDLR";
  std::vector<std::string> out;
  if (vehicle == 2) {
    for (int k = 0; k < 4; ++k) out.push_back(std::string(1, dirs[k]));
    return out;
  }
  for (char a : dirs) {
    for (char b : dirs) {
      std::string s{a, b};
      if (s == "UD" || s == "DU" || s == "LR" || s == "RL") continue;
      out.push_back(s);
    }
  }
  return out;
}

inline GameInstance build_parking(const ParkingParams& p) {
  auto pp = std::make_shared<const ParkingParams>(p);
  auto inside = [pp](const Cell& c) {
    return c[0] >= 1 && c[0] <= pp->columns && c[1] >= 1 && c[1] <= pp->rows &&
           std::find(pp->red.begin(), pp->red.end(), c) == pp->red.end();
  };
  for (const Cell& c : {p.start1, p.start2, p.bonus_cell}) {
    if (!inside(c)) Fail(ErrorKind::kModel, "parking: start or bonus cell invalid");
  }
  for (const Cell& c : p.slots) {
    if (!inside(c)) Fail(ErrorKind::kModel, "parking: slot cell invalid");
  }
  if (p.start1 == p.start2) Fail(ErrorKind::kModel, "parking: vehicles share a start");
  if (p.horizon < 0) Fail(ErrorKind::kModel, "parking: negative horizon");

  std::vector<Cell> cells;
  for (int x = 1; x <= p.columns; ++x) {
    for (int y = 1; y <= p.rows; ++y) {
      if (inside({x, y})) cells.push_back({x, y});
    }
  }
  // Percepts: every pair of cells, (x1, y1, x2, y2).
  std::vector<RealVec> percepts;
  for (const Cell& a : cells) {
    for (const Cell& b : cells) {
      percepts.push_back({double(a[0]), double(a[1]), double(b[0]), double(b[1])});
    }
  }
  auto is_slot = [pp](const Cell& c) {
    return std::find(pp->slots.begin(), pp->slots.end(), c) != pp->slots.end();
  };
  // One unit move; false if it leaves the grid, enters a red cell or breaks
  // a traffic rule at the origin cell.
  auto step = [pp, inside](Cell& c, char d) {
    if (pp->forbidden.count({c, d})) return false;
    Cell delta = Displacement(d);
    Cell next = {c[0] + delta[0], c[1] + delta[1]};
    if (!inside(next)) return false;
    c = next;
    return true;
  };

  std::vector<AgentSpec> agents(2);
  for (int i = 0; i < 2; ++i) {
    AgentSpec& a = agents[i];
    a.name = "vehicle" + std::to_string(i + 1);
    a.local_states = {{0.0}};
    a.percepts = percepts;
    for (const std::string& label : ParkingActionLabels(i + 1)) {
      Cell d = {0, 0};
      for (char c : label) {
        Cell u = Displacement(c);
        d[0] += u[0];
        d[1] += u[1];
      }
      a.actions.push_back({label, {double(d[0]), double(d[1])}});
    }
    std::vector<std::string> labels;
    for (const auto& act : a.actions) labels.push_back(act.label);
    a.availability = [i, labels, step, is_slot,
                      parked = p.parked_is_absorbing](const LocalView& v) {
      Cell me = {int(std::lround(v.per_value[2 * i])),
                 int(std::lround(v.per_value[2 * i + 1]))};
      std::vector<int> out;
      if (parked && is_slot(me)) return out;
      for (int k = 0; k < static_cast<int>(labels.size()); ++k) {
        Cell c = me;
        bool ok = true;
        for (char d : labels[k]) {
          if (!step(c, d)) {
            ok = false;
            break;
          }
        }
        if (ok) out.push_back(k);
      }
      return out;
    };
    a.observation = [](const GlobalState& s) { return s.env; };
    a.memoryless_percept = true;
  }
  GameInstance inst;
  inst.model = NsCsg(std::move(agents), 4,
                     [](const RealVec& env, const ResolvedJoint& j) {
                       RealVec next = env;
                       for (int i = 0; i < 2; ++i) {
                         if (j[i] == nullptr) continue;
                         next[2 * i] += j[i]->value[0];
                         next[2 * i + 1] += j[i]->value[1];
                       }
                       return next;
                     });
  inst.initial.env = {double(p.start1[0]), double(p.start1[1]),
                      double(p.start2[0]), double(p.start2[1])};
  const int per0 = inst.model.PerceptIndex(0, inst.initial.env);
  inst.initial.agents = {AgentState{0, per0}, AgentState{0, per0}};
  inst.horizon = p.horizon;

  for (int i = 0; i < 2; ++i) {
    RewardStructure r;
    r.state = [i, pp, is_slot](const GlobalState& s, StageInfo info) {
      const ParkingParams& p = *pp;
      if (info.stage == info.horizon && !p.count_terminal_reward) return 0.0;
      Cell x1 = {int(std::lround(s.env[0])), int(std::lround(s.env[1]))};
      Cell x2 = {int(std::lround(s.env[2])), int(std::lround(s.env[3]))};
      const Cell& me = i == 0 ? x1 : x2;
      double r = x1 == x2 ? p.collision_reward : (is_slot(me) ? 0.0 : p.step_reward);
      if (p.reward_structure == 2 && i == 1 && x2 == p.bonus_cell &&
          info.stage <= p.bonus_last_stage) {
        r += p.bonus;
      }
      return r;
    };
    inst.rewards.push_back(std::move(r));
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Vertical collision avoidance between an ownship and an intruder.
//
// Environment (h, hdot_own, hdot_int, t); each aircraft holds a trust level
// tr in 1..4 (local state) and an advisory ad in 1..9 (percept).

inline constexpr int kNumAdvisories = 9;

// Distinct accelerations over all advisories, in declaration order.
inline const std::vector<double>& VcasAccelerations() {
  static const std::vector<double> acc = {0.0,   -3.0, 3.0,  -7.33, 7.33, -9.33,
                                          9.33,  -9.7, 9.7,  -11.7, 11.7};
  return acc;
}

// The two non-zero accelerations of advisory `ad` plus 0, ascending.
inline std::vector<double> advisory_actions(int ad) {
  switch (ad) {
    case 1: return {-3.0, 0.0, 3.0};
    case 2: return {-9.33, -7.33, 0.0};
    case 3: return {0.0, 7.33, 9.33};
    case 4: return {-9.33, -7.33, 0.0};
    case 5: return {0.0, 7.33, 9.33};
    case 6: return {-11.7, -9.7, 0.0};
    case 7: return {0.0, 9.7, 11.7};
    case 8: return {-11.7, -9.7, 0.0};
    case 9: return {0.0, 9.7, 11.7};
  }
  Fail(ErrorKind::kPrecondition, "advisory must be in 1..9, got " + std::to_string(ad));
}

// Distribution over trust levels after one step.
inline std::vector<std::pair<int, double>> trust_update(int tr, bool compliant,
                                                        double eps) {
  if (tr < 1 || tr > 4) Fail(ErrorKind::kPrecondition, "trust must be in 1..4");
  if (eps < 0.0 || eps > 1.0) Fail(ErrorKind::kPrecondition, "epsilon must be in [0,1]");
  const int target = compliant ? std::min(tr + 1, 4) : std::max(tr - 1, 1);
  if (target == tr) return {{tr, 1.0}};
  std::vector<std::pair<int, double>> out;
  if (1.0 - eps > 0.0) out.push_back({target, 1.0 - eps});
  if (eps > 0.0) out.push_back({tr, eps});
  return out;
}

// One step of the vertical dynamics with dt = 1.
inline std::array<double, 4> vcas_dynamics(const std::array<double, 4>& s,
                                           double acc_own, double acc_int) {
  const double dt = 1.0;
  const auto [h, v_own, v_int, t] = s;
  return {h - dt * (v_own - v_int) - 0.5 * dt * dt * (acc_own - acc_int),
          v_own + acc_own * dt, v_int + acc_int * dt, t - dt};
}

enum class VcasRewardKind { kInstantAltitude, kTrustAndFuel };

struct VcasParams {
  double h = 50.0;
  double hdot_own = -5.0;
  double hdot_int = 5.0;
  int t = 3;
  double eps_own = 0.0;
  double eps_int = 0.0;
  int trust_own = 4;
  int trust_int = 4;
  int advisory_own = 1;
  int advisory_int = 1;
  VcasRewardKind reward = VcasRewardKind::kTrustAndFuel;
  int instant = 0;        // stage k for the instant-altitude structure
  bool zero_sum = false;  // negate the intruder's instant-altitude reward
  double altitude_limit = 200.0;
  // Nine networks f_1..f_9; empty means seeded stubs.
  std::vector<FeedForwardNet> nets;
  std::uint64_t stub_seed = 2024;
};

inline std::vector<int> VcasStubShape() {
  std::vector<int> shape = {4};
  for (int k = 0; k < 7; ++k) shape.push_back(45);
  shape.push_back(kNumAdvisories);
  return shape;
}

inline std::vector<FeedForwardNet> VcasStubNets(std::uint64_t seed) {
  std::vector<FeedForwardNet> nets;
  for (int ad = 1; ad <= kNumAdvisories; ++ad) {
    nets.push_back(RandomNet(VcasStubShape(), seed * 1000003ULL + ad));
  }
  return nets;
}

// Loads vcas_1.json .. vcas_9.json from `dir`.
inline std::vector<FeedForwardNet> LoadVcasNets(const std::string& dir) {
  std::vector<FeedForwardNet> nets;
  for (int ad = 1; ad <= kNumAdvisories; ++ad) {
    FeedForwardNet net = LoadNet(dir + "/vcas_" + std::to_string(ad) + ".json");
    if (net.input_dim() != 4 || net.output_dim() != kNumAdvisories) {
      Fail(ErrorKind::kModel, "vcas_" + std::to_string(ad) +
                                  ".json must map 4 inputs to 9 scores");
    }
    nets.push_back(std::move(net));
  }
  return nets;
}

inline RealVec VcasInput(const RealVec& env, int agent) {
  if (agent == 0) return {env[0], env[1], env[2], env[3]};
  return {-env[0], env[2], env[1], env[3]};
}

inline GameInstance build_vcas(const VcasParams& p) {
  if (p.t < 0) Fail(ErrorKind::kModel, "vcas: t must be >= 0");
  if (p.eps_own < 0 || p.eps_own > 1 || p.eps_int < 0 || p.eps_int > 1) {
    Fail(ErrorKind::kModel, "vcas: epsilon must be in [0,1]");
  }
  if (std::abs(p.h) > 3000 || std::abs(p.hdot_own) > 2500 ||
      std::abs(p.hdot_int) > 2500 || p.t > 40) {
    Fail(ErrorKind::kModel, "vcas: initial environment outside the state box");
  }
  auto nets = std::make_shared<std::vector<FeedForwardNet>>(
      p.nets.empty() ? VcasStubNets(p.stub_seed) : p.nets);
  if (nets->size() != kNumAdvisories) {
    Fail(ErrorKind::kModel, "vcas: need nine networks");
  }
  for (const auto& net : *nets) {
    ValidateNet(net);
    if (net.input_dim() != 4 || net.output_dim() != kNumAdvisories) {
      Fail(ErrorKind::kModel, "vcas: networks must map 4 inputs to 9 scores");
    }
  }
  const auto& acc = VcasAccelerations();
  auto index_of = [&acc](double a) {
    for (size_t k = 0; k < acc.size(); ++k) {
      if (std::abs(acc[k] - a) < 1e-9) return static_cast<int>(k);
    }
    Fail(ErrorKind::kModel, "unknown acceleration");
  };
  std::vector<std::vector<int>> allowed(kNumAdvisories + 1);
  for (int ad = 1; ad <= kNumAdvisories; ++ad) {
    for (double a : advisory_actions(ad)) allowed[ad].push_back(index_of(a));
  }

  std::vector<AgentSpec> agents(2);
  const std::array<double, 2> eps = {p.eps_own, p.eps_int};
  for (int i = 0; i < 2; ++i) {
    AgentSpec& a = agents[i];
    a.name = i == 0 ? "own" : "int";
    for (int tr = 1; tr <= 4; ++tr) a.local_states.push_back({double(tr)});
    for (int ad = 1; ad <= kNumAdvisories; ++ad) a.percepts.push_back({double(ad)});
    for (double v : acc) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), v > 0 ? "+%g" : "%g", v);
      a.actions.push_back({buf, {v}});
    }
    a.availability = [allowed](const LocalView& v) { return allowed[v.per + 1]; };
    a.observation = [nets, i](const GlobalState& s) {
      const int ad = s.agents[i].per + 1;
      return RealVec{double(ArgMax(nn_forward((*nets)[ad - 1], VcasInput(s.env, i))) + 1)};
    };
    const double e = eps[i];
    a.local_transition = [e, i](const LocalView& v, const ResolvedJoint& j) {
      const bool compliant = j[i] != nullptr && j[i]->value[0] != 0.0;
      auto dist = trust_update(v.loc + 1, compliant, e);
      for (auto& [tr, q] : dist) tr -= 1;
      return dist;
    };
  }
  GameInstance inst;
  inst.model = NsCsg(std::move(agents), 4, [](const RealVec& env, const ResolvedJoint& j) {
    const double a0 = j[0] ? j[0]->value[0] : 0.0;
    const double a1 = j[1] ? j[1]->value[0] : 0.0;
    auto n = vcas_dynamics({env[0], env[1], env[2], env[3]}, a0, a1);
    return RealVec(n.begin(), n.end());
  });
  inst.initial.env = {p.h, p.hdot_own, p.hdot_int, double(p.t)};
  inst.initial.agents = {AgentState{p.trust_own - 1, p.advisory_own - 1},
                         AgentState{p.trust_int - 1, p.advisory_int - 1}};
  inst.model.CheckState(inst.initial);
  inst.horizon = p.t;

  if (p.reward == VcasRewardKind::kInstantAltitude) {
    for (int i = 0; i < 2; ++i) {
      RewardStructure r;
      const double sign = (i == 1 && p.zero_sum) ? -1.0 : 1.0;
      const int k = p.instant;
      r.state = [sign, k](const GlobalState& s, StageInfo info) {
        return info.stage == k ? sign * s.env[0] : 0.0;
      };
      inst.rewards.push_back(std::move(r));
    }
    return inst;
  }

  // Trust-and-fuel: normalize by the extents of the unfolded game.
  GameGraph g = unfold_regions(inst.model, inst.initial, inst.horizon);
  double h_max = 0.0, acc_max = 0.0;
  for (const GameNode& n : g.nodes) {
    h_max = std::max(h_max, std::abs(n.state.env[0]));
    for (const auto& acts : n.actions) {
      for (int a : acts) {
        if (a != kIdle) acc_max = std::max(acc_max, std::abs(acc[a]));
      }
    }
  }
  const double limit = p.altitude_limit;
  for (int i = 0; i < 2; ++i) {
    RewardStructure r;
    r.state = [i, h_max, limit](const GlobalState& s, StageInfo) {
      const double h = std::abs(s.env[0]);
      if (h > limit) return 0.0;
      if (h_max == 0.0 && h != 0.0) Fail(ErrorKind::kModel, "zero altitude extent");
      return (h_max == 0.0 ? 0.0 : h / h_max) + (s.agents[i].loc + 1) / 4.0;
    };
    r.action = [i, acc_max, limit](const GlobalState& s, const ResolvedJoint& j,
                                   StageInfo) {
      if (std::abs(s.env[0]) <= limit) return 0.0;
      const double a = j[i] ? std::abs(j[i]->value[0]) : 0.0;
      if (a == 0.0) return 0.0;
      if (acc_max == 0.0) Fail(ErrorKind::kModel, "zero acceleration extent");
      return -a / acc_max;
    };
    inst.rewards.push_back(std::move(r));
  }
  return inst;
}

}  // namespace nscsg
