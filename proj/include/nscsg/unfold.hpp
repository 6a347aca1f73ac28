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
#include <chrono>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nscsg/error.hpp"
#include "nscsg/model.hpp"

namespace nscsg {

enum class GraphKind { kTree, kRegion };

struct Outcome {
  int child;
  double prob;
};

struct GameNode {
  int stage = 0;
  GlobalState state;  // last(h)
  int parent = -1;    // in a region graph: the first parent discovered
  int parent_joint = -1;
  // Available actions per agent (kIdle possible) and, per joint index, the
  // successor distribution. Both empty at stage K.
  std::vector<std::vector<int>> actions;
  std::vector<std::vector<Outcome>> outcomes;

  bool is_leaf() const { return outcomes.empty(); }
  int num_actions(int agent) const { return actions[agent].size(); }
  int num_joint() const { return outcomes.size(); }

  // Joint index -> per-agent positions in `actions`, first agent major.
  std::vector<int> Decode(int joint) const {
    std::vector<int> pos(actions.size());
    for (int i = static_cast<int>(actions.size()) - 1; i >= 0; --i) {
      pos[i] = joint % actions[i].size();
      joint /= actions[i].size();
    }
    return pos;
  }

  JointAction Joint(int joint) const {
    std::vector<int> pos = Decode(joint);
    JointAction a;
    for (size_t i = 0; i < pos.size(); ++i) a.moves.push_back(actions[i][pos[i]]);
    return a;
  }
};

struct GraphStats {
  long long nodes = 0;
  long long transitions = 0;  // (node, joint action, successor) triples
  std::vector<long long> per_stage;
  double build_seconds = 0.0;

  // Counts after closing the horizon with one absorbing sink state, as
  // model checkers do for finite-horizon encodings: one extra state, one
  // edge from every stage-K node plus the sink's self-loop.
  long long nodes_with_sink() const { return nodes + 1; }
  long long transitions_with_sink() const {
    return transitions + (per_stage.empty() ? 0 : per_stage.back()) + 1;
  }
};

struct GameGraph {
  GraphKind kind = GraphKind::kTree;
  int horizon = 0;
  std::vector<GameNode> nodes;
  std::vector<std::vector<int>> stages;  // node ids per stage, ascending
  double build_seconds = 0.0;

  int root() const { return 0; }
  const GameNode& node(int id) const { return nodes.at(id); }
  int size() const { return nodes.size(); }

  // Distinct one-stage successors in first-seen order.
  std::vector<int> succ(int id) const {
    std::vector<int> out;
    for (const auto& outs : nodes.at(id).outcomes) {
      for (const Outcome& o : outs) {
        if (std::find(out.begin(), out.end(), o.child) == out.end()) {
          out.push_back(o.child);
        }
      }
    }
    return out;
  }

  // Distinct predecessors of every node.
  std::vector<std::vector<int>> Parents() const {
    std::vector<std::vector<int>> parents(nodes.size());
    for (int id = 0; id < size(); ++id) {
      for (int c : succ(id)) parents[c].push_back(id);
    }
    return parents;
  }

  // All nodes from which `id` is reachable, `id` included, ascending.
  std::vector<int> Ancestors(int id) const {
    auto parents = Parents();
    std::vector<char> mark(nodes.size(), 0);
    std::vector<int> stack = {id};
    mark[id] = 1;
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      for (int p : parents[n]) {
        if (!mark[p]) {
          mark[p] = 1;
          stack.push_back(p);
        }
      }
    }
    std::vector<int> out;
    for (int n = 0; n < size(); ++n) {
      if (mark[n]) out.push_back(n);
    }
    return out;
  }
};

struct UnfoldOptions {
  long long max_nodes = 5'000'000;
};

namespace internal {

inline GameGraph Unfold(const NsCsg& model, const GlobalState& s, int K,
                        GraphKind kind, const UnfoldOptions& opts) {
  if (K < 0) Fail(ErrorKind::kPrecondition, "horizon must be >= 0");
  model.CheckState(s);
  auto start = std::chrono::steady_clock::now();
  GameGraph g;
  g.kind = kind;
  g.horizon = K;
  g.stages.assign(K + 1, {});
  GameNode root;
  root.state = s;
  g.nodes.push_back(std::move(root));
  g.stages[0].push_back(0);

  long long transitions = 0;
  for (int stage = 0; stage < K; ++stage) {
    std::unordered_map<std::string, int> index;  // region merging
    for (int id : g.stages[stage]) {
      const GlobalState cur = g.nodes[id].state;
      auto avail = model.AvailableActions(cur);
      std::vector<JointAction> joints = NsCsg::Product(avail);
      std::vector<std::vector<Outcome>> outcomes(joints.size());
      for (size_t j = 0; j < joints.size(); ++j) {
        for (Successor& succ : model.successors(cur, joints[j])) {
          int child;
          std::string key;
          if (kind == GraphKind::kRegion) {
            key = model.StateKey(succ.state);
            auto it = index.find(key);
            if (it != index.end()) {
              outcomes[j].push_back(Outcome{it->second, succ.prob});
              ++transitions;
              continue;
            }
          }
          if (static_cast<long long>(g.nodes.size()) >= opts.max_nodes) {
            Fail(ErrorKind::kResource,
                 "node cap " + std::to_string(opts.max_nodes) +
                     " exceeded while expanding stage " +
                     std::to_string(stage) + " (" +
                     std::to_string(g.nodes.size()) + " nodes, " +
                     std::to_string(transitions) + " transitions so far)");
          }
          child = g.nodes.size();
          GameNode n;
          n.stage = stage + 1;
          n.state = std::move(succ.state);
          n.parent = id;
          n.parent_joint = j;
          g.nodes.push_back(std::move(n));
          g.stages[stage + 1].push_back(child);
          if (kind == GraphKind::kRegion) index.emplace(std::move(key), child);
          outcomes[j].push_back(Outcome{child, succ.prob});
          ++transitions;
        }
      }
      g.nodes[id].actions = std::move(avail);
      g.nodes[id].outcomes = std::move(outcomes);
    }
  }
  g.build_seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  return g;
}

}  // namespace internal

// Breadth-first unfolding of all histories from `s` over K stages. Node ids
// follow expansion order, so they are reproducible.
inline GameGraph unfold_tree(const NsCsg& model, const GlobalState& s, int K,
                             const UnfoldOptions& opts = {}) {
  return internal::Unfold(model, s, K, GraphKind::kTree, opts);
}

// As unfold_tree, with histories merged when they share (state, stage).
inline GameGraph unfold_regions(const NsCsg& model, const GlobalState& s,
                                int K, const UnfoldOptions& opts = {}) {
  return internal::Unfold(model, s, K, GraphKind::kRegion, opts);
}

inline GraphStats stats(const GameGraph& g) {
  GraphStats st;
  st.nodes = g.nodes.size();
  for (const auto& n : g.nodes) {
    for (const auto& outs : n.outcomes) st.transitions += outs.size();
  }
  for (const auto& ids : g.stages) st.per_stage.push_back(ids.size());
  st.build_seconds = g.build_seconds;
  return st;
}

// Rewards evaluated once per node: state[node][agent] and
// action[node][joint][agent].
struct RewardTable {
  std::vector<RealVec> state;
  std::vector<std::vector<RealVec>> action;
  int num_agents = 0;
};

inline RewardTable BuildRewardTable(const NsCsg& model, const GameGraph& g,
                                    const Rewards& rewards) {
  const int n = rewards.size();
  RewardTable t;
  t.num_agents = n;
  t.state.resize(g.size());
  t.action.resize(g.size());
  for (int id = 0; id < g.size(); ++id) {
    const GameNode& node = g.nodes[id];
    StageInfo info{node.stage, g.horizon};
    t.state[id].resize(n);
    for (int i = 0; i < n; ++i) {
      t.state[id][i] = EvalStateReward(rewards[i], node.state, info);
    }
    t.action[id].resize(node.num_joint());
    for (int j = 0; j < node.num_joint(); ++j) {
      ResolvedJoint joint = model.Resolve(node.Joint(j));
      t.action[id][j].resize(n);
      for (int i = 0; i < n; ++i) {
        t.action[id][j][i] =
            EvalActionReward(rewards[i], node.state, joint, info);
      }
    }
  }
  return t;
}

// Future path: states[0..m] and actions[0..m-1], starting at `start_stage`.
struct Path {
  int start_stage = 0;
  std::vector<GlobalState> states;
  std::vector<JointAction> actions;
};

// Accumulated reward Y_i of a path that ends at stage K.
inline RealVec path_value(const NsCsg& model, const Rewards& rewards,
                          const Path& path, int K) {
  if (path.states.size() != path.actions.size() + 1) {
    Fail(ErrorKind::kPrecondition, "path needs one more state than actions");
  }
  if (path.start_stage + static_cast<int>(path.actions.size()) != K) {
    Fail(ErrorKind::kPrecondition, "path does not end at stage K");
  }
  RealVec y(rewards.size(), 0.0);
  for (size_t k = 0; k < path.actions.size(); ++k) {
    StageInfo info{path.start_stage + static_cast<int>(k), K};
    ResolvedJoint joint = model.Resolve(path.actions[k]);
    for (size_t i = 0; i < rewards.size(); ++i) {
      y[i] += EvalActionReward(rewards[i], path.states[k], joint, info) +
              EvalStateReward(rewards[i], path.states[k], info);
    }
  }
  for (size_t i = 0; i < rewards.size(); ++i) {
    y[i] += EvalStateReward(rewards[i], path.states.back(), StageInfo{K, K});
  }
  return y;
}

inline nlohmann::json StateToJson(const GlobalState& s) {
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : s.agents) agents.push_back({{"loc", a.loc}, {"per", a.per}});
  return {{"agents", agents}, {"env", s.env}};
}

inline nlohmann::json GraphToJson(const NsCsg& model, const GameGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  nlohmann::json edges = nlohmann::json::array();
  for (int id = 0; id < g.size(); ++id) {
    const GameNode& n = g.nodes[id];
    nodes.push_back({{"id", id},
                     {"stage", n.stage},
                     {"parent", n.parent},
                     {"state", StateToJson(n.state)}});
    for (int j = 0; j < n.num_joint(); ++j) {
      JointAction a = n.Joint(j);
      std::vector<std::string> labels;
      for (int i = 0; i < static_cast<int>(a.moves.size()); ++i) {
        labels.push_back(model.ActionLabel(i, a.moves[i]));
      }
      for (const Outcome& o : n.outcomes[j]) {
        edges.push_back(
            {{"from", id}, {"joint", labels}, {"to", o.child}, {"prob", o.prob}});
      }
    }
  }
  return {{"kind", g.kind == GraphKind::kTree ? "tree" : "region"},
          {"horizon", g.horizon},
          {"nodes", nodes},
          {"edges", edges}};
}

}  // namespace nscsg
