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
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nscsg/error.hpp"

namespace nscsg {

using RealVec = std::vector<double>;

// Index of the idle action, used when an agent has nothing available.
inline constexpr int kIdle = -1;
inline const char kIdleLabel[] = "idle";

struct Action {
  std::string label;
  RealVec value;
};

struct AgentState {
  int loc = 0;  // index into AgentSpec::local_states
  int per = 0;  // index into AgentSpec::percepts
  bool operator==(const AgentState&) const = default;
};

struct GlobalState {
  std::vector<AgentState> agents;
  RealVec env;
};

// Per-agent action indices; kIdle marks the idle action.
struct JointAction {
  std::vector<int> moves;
  bool operator==(const JointAction&) const = default;
};

// Joint action with indices replaced by the actions themselves; nullptr is
// the idle action.
using ResolvedJoint = std::vector<const Action*>;

// Read-only view of one agent's local state handed to model callbacks.
struct LocalView {
  int loc;
  int per;
  const RealVec& loc_value;
  const RealVec& per_value;
};

struct StageInfo {
  int stage = 0;
  int horizon = 0;
};

using AvailabilityFn = std::function<std::vector<int>(const LocalView&)>;
using ObservationFn = std::function<RealVec(const GlobalState&)>;
using LocalTransitionFn = std::function<std::vector<std::pair<int, double>>(
    const LocalView&, const ResolvedJoint&)>;
using EnvTransitionFn =
    std::function<RealVec(const RealVec&, const ResolvedJoint&)>;

struct AgentSpec {
  std::string name;
  std::vector<RealVec> local_states;
  std::vector<RealVec> percepts;
  std::vector<Action> actions;
  AvailabilityFn availability;            // empty: every action available
  ObservationFn observation;              // empty: percept kept
  LocalTransitionFn local_transition;     // empty: local state kept
  // Set when no observation reads this agent's percept. With availability
  // evaluated on the refreshed percept, the stored percept then cannot
  // influence the future and region keys leave it out.
  bool memoryless_percept = false;
};

struct RewardStructure {
  std::function<double(const GlobalState&, const ResolvedJoint&, StageInfo)>
      action;  // empty: zero
  std::function<double(const GlobalState&, StageInfo)> state;  // empty: zero
};

using Rewards = std::vector<RewardStructure>;

struct Successor {
  GlobalState state;
  double prob;
};

using TransitionDistribution = std::vector<Successor>;

inline constexpr int kDefaultPrecision = 9;

namespace internal {

inline void AppendRounded(std::string& out, const RealVec& v, int precision) {
  const double scale = std::pow(10.0, precision);
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    long long q = std::llround(v[i] * scale);
    out += std::to_string(q);
  }
}

inline std::string VecKey(const RealVec& v, int precision) {
  std::string key;
  AppendRounded(key, v, precision);
  return key;
}

}  // namespace internal

// Opaque key; equal iff all components agree after rounding reals to
// `precision` decimals. Local states and percepts are compared by index,
// which is equivalent because their value lists are deduplicated at model
// construction.
inline std::string canonical_key(const GlobalState& s,
                                 int precision = kDefaultPrecision) {
  std::string key;
  for (const AgentState& a : s.agents) {
    key += std::to_string(a.loc);
    key += ':';
    key += std::to_string(a.per);
    key += '|';
  }
  internal::AppendRounded(key, s.env, precision);
  return key;
}

class NsCsg {
 public:
  NsCsg() = default;
  NsCsg(std::vector<AgentSpec> agents, int env_dim,
        EnvTransitionFn env_transition)
      : agents_(std::move(agents)),
        env_dim_(env_dim),
        env_transition_(std::move(env_transition)) {
    Validate();
  }

  int num_agents() const { return agents_.size(); }
  int env_dim() const { return env_dim_; }
  const AgentSpec& agent(int i) const { return agents_.at(i); }
  const std::vector<AgentSpec>& agents() const { return agents_; }

  // When false, Delta_i sees the percept held before the refresh.
  bool availability_on_refreshed_percept = true;
  int precision = kDefaultPrecision;

  // Changes the rounding used by keys and percept lookup.
  void SetPrecision(int digits) {
    if (digits < 0 || digits > 15) Fail(ErrorKind::kPrecondition, "precision must be in [0,15]");
    precision = digits;
    Validate();
  }

  // canonical_key with percepts that cannot matter masked out.
  std::string StateKey(const GlobalState& s) const {
    if (!availability_on_refreshed_percept) return canonical_key(s, precision);
    GlobalState masked = s;
    for (int i = 0; i < num_agents(); ++i) {
      if (agents_[i].memoryless_percept) masked.agents[i].per = -1;
    }
    return canonical_key(masked, precision);
  }

  int PerceptIndex(int agent, const RealVec& value) const {
    auto it = percept_index_[agent].find(internal::VecKey(value, precision));
    if (it == percept_index_[agent].end()) {
      std::ostringstream os;
      os << "observation of agent " << agent << " (" << agents_[agent].name
         << ") produced a percept outside Per_i: (";
      for (size_t k = 0; k < value.size(); ++k) {
        os << (k ? "," : "") << value[k];
      }
      os << ")";
      Fail(ErrorKind::kModel, os.str());
    }
    return it->second;
  }

  int ActionIndex(int agent, const std::string& label) const {
    const auto& acts = agents_.at(agent).actions;
    for (int a = 0; a < static_cast<int>(acts.size()); ++a) {
      if (acts[a].label == label) return a;
    }
    if (label == kIdleLabel) return kIdle;
    Fail(ErrorKind::kModel, "agent " + std::to_string(agent) +
                                " has no action labelled " + label);
  }

  const std::string& ActionLabel(int agent, int action) const {
    static const std::string idle = kIdleLabel;
    return action == kIdle ? idle : agents_.at(agent).actions.at(action).label;
  }

  std::string DescribeJoint(const JointAction& a) const {
    std::string out = "(";
    for (int i = 0; i < static_cast<int>(a.moves.size()); ++i) {
      if (i) out += ',';
      out += ActionLabel(i, a.moves[i]);
    }
    return out + ")";
  }

  ResolvedJoint Resolve(const JointAction& a) const {
    ResolvedJoint r(a.moves.size(), nullptr);
    for (int i = 0; i < static_cast<int>(a.moves.size()); ++i) {
      if (a.moves[i] != kIdle) r[i] = &agents_[i].actions.at(a.moves[i]);
    }
    return r;
  }

  LocalView View(int agent, const AgentState& s) const {
    const AgentSpec& spec = agents_[agent];
    return LocalView{s.loc, s.per, spec.local_states.at(s.loc),
                     spec.percepts.at(s.per)};
  }

  void CheckState(const GlobalState& s) const {
    if (static_cast<int>(s.agents.size()) != num_agents()) {
      Fail(ErrorKind::kDimension, "state has " +
                                      std::to_string(s.agents.size()) +
                                      " agents, model has " +
                                      std::to_string(num_agents()));
    }
    if (static_cast<int>(s.env.size()) != env_dim_) {
      Fail(ErrorKind::kDimension, "environment dimension mismatch");
    }
    for (int i = 0; i < num_agents(); ++i) {
      const AgentState& a = s.agents[i];
      if (a.loc < 0 || a.loc >= static_cast<int>(agents_[i].local_states.size()) ||
          a.per < 0 || a.per >= static_cast<int>(agents_[i].percepts.size())) {
        Fail(ErrorKind::kModel,
             "agent " + std::to_string(i) + " state index out of range");
      }
    }
  }

  // New percept index of every agent, obs_i applied to the full state.
  std::vector<int> observe_all(const GlobalState& s) const {
    std::vector<int> per(num_agents());
    for (int i = 0; i < num_agents(); ++i) {
      per[i] = agents_[i].observation
                   ? PerceptIndex(i, agents_[i].observation(s))
                   : s.agents[i].per;
    }
    return per;
  }

  GlobalState Refreshed(const GlobalState& s) const {
    GlobalState r = s;
    std::vector<int> per = observe_all(s);
    for (int i = 0; i < num_agents(); ++i) r.agents[i].per = per[i];
    return r;
  }

  // Available action indices of `agent`, {kIdle} when Delta_i is empty.
  // `before` and `after` are the agent's state before and after the
  // percept refresh.
  std::vector<int> Available(int agent, const AgentState& before,
                             const AgentState& after) const {
    const AgentSpec& spec = agents_[agent];
    std::vector<int> acts;
    if (!spec.availability) {
      acts.resize(spec.actions.size());
      for (size_t a = 0; a < acts.size(); ++a) acts[a] = a;
    } else {
      const AgentState& seen =
          availability_on_refreshed_percept ? after : before;
      acts = spec.availability(View(agent, seen));
      std::sort(acts.begin(), acts.end());
      acts.erase(std::unique(acts.begin(), acts.end()), acts.end());
      for (int a : acts) {
        if (a < 0 || a >= static_cast<int>(spec.actions.size())) {
          Fail(ErrorKind::kModel, "availability of agent " +
                                      std::to_string(agent) +
                                      " returned an unknown action index");
        }
      }
    }
    if (acts.empty()) acts.push_back(kIdle);
    return acts;
  }

  // Per-agent available actions at `s` (after the percept refresh).
  std::vector<std::vector<int>> AvailableActions(const GlobalState& s) const {
    GlobalState r = Refreshed(s);
    std::vector<std::vector<int>> out(num_agents());
    for (int i = 0; i < num_agents(); ++i) {
      out[i] = Available(i, s.agents[i], r.agents[i]);
    }
    return out;
  }

  // Cartesian product of the available actions, first agent most
  // significant, each agent's actions in declaration order.
  std::vector<JointAction> joint_actions(const GlobalState& s) const {
    return Product(AvailableActions(s));
  }

  static std::vector<JointAction> Product(
      const std::vector<std::vector<int>>& per_agent) {
    std::vector<JointAction> out(1);
    for (const auto& acts : per_agent) {
      std::vector<JointAction> next;
      next.reserve(out.size() * acts.size());
      for (const JointAction& prefix : out) {
        for (int a : acts) {
          JointAction j = prefix;
          j.moves.push_back(a);
          next.push_back(std::move(j));
        }
      }
      out = std::move(next);
    }
    return out;
  }

  TransitionDistribution successors(const GlobalState& s,
                                    const JointAction& alpha) const {
    CheckState(s);
    if (static_cast<int>(alpha.moves.size()) != num_agents()) {
      Fail(ErrorKind::kDimension, "joint action has wrong arity");
    }
    GlobalState r = Refreshed(s);
    for (int i = 0; i < num_agents(); ++i) {
      std::vector<int> avail = Available(i, s.agents[i], r.agents[i]);
      if (std::find(avail.begin(), avail.end(), alpha.moves[i]) ==
          avail.end()) {
        std::string msg = "action " + ActionLabel(i, alpha.moves[i]) +
                          " unavailable for agent " + std::to_string(i) +
                          "; Delta_i = {";
        for (size_t k = 0; k < avail.size(); ++k) {
          msg += (k ? "," : "") + ActionLabel(i, avail[k]);
        }
        Fail(ErrorKind::kPrecondition, msg + "}");
      }
    }
    ResolvedJoint joint = Resolve(alpha);

    // Product of the per-agent local distributions.
    std::vector<std::pair<std::vector<int>, double>> combos = {{{}, 1.0}};
    for (int i = 0; i < num_agents(); ++i) {
      std::vector<std::pair<int, double>> dist;
      if (agents_[i].local_transition) {
        dist = agents_[i].local_transition(View(i, r.agents[i]), joint);
      } else {
        dist = {{r.agents[i].loc, 1.0}};
      }
      double total = 0.0;
      for (const auto& [loc, p] : dist) {
        if (p < 0.0 || loc < 0 ||
            loc >= static_cast<int>(agents_[i].local_states.size())) {
          Fail(ErrorKind::kModel, "local transition of agent " +
                                      std::to_string(i) +
                                      " returned an invalid entry");
        }
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-12) {
        Fail(ErrorKind::kModel, "local transition of agent " +
                                    std::to_string(i) + " sums to " +
                                    std::to_string(total));
      }
      std::vector<std::pair<std::vector<int>, double>> next;
      for (const auto& [prefix, q] : combos) {
        for (const auto& [loc, p] : dist) {
          if (p <= 0.0) continue;
          auto locs = prefix;
          locs.push_back(loc);
          next.emplace_back(std::move(locs), q * p);
        }
      }
      combos = std::move(next);
    }

    RealVec env = env_transition_ ? env_transition_(s.env, joint) : s.env;
    if (static_cast<int>(env.size()) != env_dim_) {
      Fail(ErrorKind::kModel, "environment transition changed dimension");
    }

    TransitionDistribution out;
    std::map<std::vector<int>, int> seen;
    for (auto& [locs, p] : combos) {
      auto it = seen.find(locs);
      if (it != seen.end()) {
        out[it->second].prob += p;
        continue;
      }
      GlobalState next;
      next.env = env;
      next.agents.resize(num_agents());
      for (int i = 0; i < num_agents(); ++i) {
        next.agents[i] = AgentState{locs[i], r.agents[i].per};
      }
      seen.emplace(locs, out.size());
      out.push_back(Successor{std::move(next), p});
    }
    return out;
  }

 private:
  void Validate() {
    if (agents_.empty()) Fail(ErrorKind::kModel, "model has no agents");
    percept_index_.assign(agents_.size(), {});
    for (int i = 0; i < num_agents(); ++i) {
      const AgentSpec& spec = agents_[i];
      if (spec.local_states.empty() || spec.percepts.empty()) {
        Fail(ErrorKind::kModel, "agent " + std::to_string(i) +
                                    " needs local states and percepts");
      }
      std::map<std::string, int> labels;
      for (const Action& a : spec.actions) {
        if (a.label == kIdleLabel || !labels.emplace(a.label, 0).second) {
          Fail(ErrorKind::kModel, "agent " + std::to_string(i) +
                                      " has a duplicate or reserved action "
                                      "label " + a.label);
        }
      }
      for (int p = 0; p < static_cast<int>(spec.percepts.size()); ++p) {
        if (!percept_index_[i]
                 .emplace(internal::VecKey(spec.percepts[p], precision), p)
                 .second) {
          Fail(ErrorKind::kModel,
               "agent " + std::to_string(i) + " has duplicate percepts");
        }
      }
    }
  }

  std::vector<AgentSpec> agents_;
  int env_dim_ = 0;
  EnvTransitionFn env_transition_;
  std::vector<std::map<std::string, int>> percept_index_;
};

// A model together with what is needed to unfold and solve it.
struct GameInstance {
  NsCsg model;
  GlobalState initial;
  int horizon = 0;
  Rewards rewards;
};

inline double EvalStateReward(const RewardStructure& r, const GlobalState& s,
                              StageInfo info) {
  return r.state ? r.state(s, info) : 0.0;
}

inline double EvalActionReward(const RewardStructure& r, const GlobalState& s,
                               const ResolvedJoint& a, StageInfo info) {
  return r.action ? r.action(s, a, info) : 0.0;
}

}  // namespace nscsg
