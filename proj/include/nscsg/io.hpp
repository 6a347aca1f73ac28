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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nscsg/benchmarks.hpp"
#include "nscsg/error.hpp"
#include "nscsg/fsi.hpp"
#include "nscsg/gbi.hpp"
#include "nscsg/model.hpp"
#include "nscsg/unfold.hpp"
#include "nscsg/verify.hpp"

namespace nscsg {

using nlohmann::json;

// Numbers in every text output use nine significant digits.
inline std::string FormatNumber(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

inline json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kModel, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kModel, path + ": " + e.what());
  }
}

inline void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kResource, "cannot write " + path);
  out << text;
}

// Accepts either inline JSON text or the path of a JSON file.
inline json ParseJsonArgument(const std::string& arg) {
  if (arg.empty()) return json::object();
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) {
    try {
      return json::parse(arg);
    } catch (const json::exception& e) {
      Fail(ErrorKind::kModel, std::string("bad JSON argument: ") + e.what());
    }
  }
  return ReadJsonFile(arg);
}

namespace internal {

template <typename T>
T Get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    Fail(ErrorKind::kModel, std::string("field '") + key + "': " + e.what());
  }
}

inline Cell GetCell(const json& j) {
  if (!j.is_array() || j.size() != 2) Fail(ErrorKind::kModel, "a cell is [x, y]");
  return {j[0].get<int>(), j[1].get<int>()};
}

// ---------------------------------------------------------------------------
// Tabular models.

struct TabularMatch {
  bool any_env = true;
  std::string env;
  int local = -1;    // -1: any
  int percept = -1;  // -1: any
  int stage = -1;    // -1: any
  std::vector<std::string> joint;  // "*" matches everything
};

inline TabularMatch ParseMatch(const json& row, int precision) {
  TabularMatch m;
  if (row.contains("env")) {
    m.any_env = false;
    m.env = VecKey(row["env"].get<RealVec>(), precision);
  }
  m.local = Get<int>(row, "local", -1);
  m.percept = Get<int>(row, "percept", -1);
  m.stage = Get<int>(row, "stage", -1);
  if (row.contains("joint")) m.joint = row["joint"].get<std::vector<std::string>>();
  return m;
}

inline bool JointMatches(const std::vector<std::string>& pattern,
                         const ResolvedJoint& a) {
  if (pattern.empty()) return true;
  if (pattern.size() != a.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (pattern[i] == "*") continue;
    const std::string& label = a[i] ? a[i]->label : std::string(kIdleLabel);
    if (pattern[i] != label) return false;
  }
  return true;
}

inline bool EnvMatches(const TabularMatch& m, const RealVec& env, int precision) {
  return m.any_env || m.env == VecKey(env, precision);
}

inline int LabelIndex(const std::vector<Action>& actions, const std::string& label) {
  for (size_t k = 0; k < actions.size(); ++k) {
    if (actions[k].label == label) return k;
  }
  Fail(ErrorKind::kModel, "unknown action label " + label);
}

inline GameInstance BuildTabular(const json& j) {
  const int precision = Get<int>(j, "precision", kDefaultPrecision);
  const int env_dim = Get<int>(j, "env_dim", 0);
  if (!j.contains("agents") || !j["agents"].is_array()) {
    Fail(ErrorKind::kModel, "tabular model needs an 'agents' array");
  }
  std::vector<AgentSpec> agents;
  for (const json& ja : j["agents"]) {
    AgentSpec a;
    a.name = Get<std::string>(ja, "name", "agent" + std::to_string(agents.size()));
    a.local_states = Get<std::vector<RealVec>>(ja, "local_states", {RealVec{0.0}});
    a.percepts = Get<std::vector<RealVec>>(ja, "percepts", {RealVec{0.0}});
    for (const json& act : Get<json>(ja, "actions", json::array())) {
      if (act.is_string()) {
        a.actions.push_back({act.get<std::string>(), {}});
      } else {
        a.actions.push_back({Get<std::string>(act, "label", ""),
                             Get<RealVec>(act, "value", {})});
      }
    }
    auto actions = std::make_shared<const std::vector<Action>>(a.actions);

    if (ja.contains("availability")) {
      std::vector<std::pair<TabularMatch, std::vector<int>>> rows;
      for (const json& row : ja["availability"]) {
        std::vector<int> ids;
        for (const auto& label : Get<std::vector<std::string>>(row, "actions", {})) {
          ids.push_back(LabelIndex(*actions, label));
        }
        rows.emplace_back(ParseMatch(row, precision), ids);
      }
      const int n = a.actions.size();
      a.availability = [rows, n](const LocalView& v) {
        for (const auto& [m, ids] : rows) {
          if ((m.local < 0 || m.local == v.loc) &&
              (m.percept < 0 || m.percept == v.per)) {
            return ids;
          }
        }
        std::vector<int> all(n);
        for (int k = 0; k < n; ++k) all[k] = k;
        return all;
      };
    }

    const int self = agents.size();
    if (ja.contains("observation")) {
      std::vector<std::pair<TabularMatch, RealVec>> rows;
      for (const json& row : ja["observation"]) {
        rows.emplace_back(ParseMatch(row, precision), Get<RealVec>(row, "percept", {}));
      }
      auto percepts = a.percepts;
      a.observation = [rows, percepts, self, precision](const GlobalState& s) {
        for (const auto& [m, out] : rows) {
          if (EnvMatches(m, s.env, precision) &&
              (m.local < 0 || m.local == s.agents[self].loc)) {
            return out;
          }
        }
        return percepts[s.agents[self].per];
      };
    }

    if (ja.contains("transitions")) {
      std::vector<std::pair<TabularMatch, std::vector<std::pair<int, double>>>> rows;
      for (const json& row : ja["transitions"]) {
        std::vector<std::pair<int, double>> next;
        for (const json& e : Get<json>(row, "next", json::array())) {
          next.emplace_back(Get<int>(e, "local_state", 0), Get<double>(e, "prob", 1.0));
        }
        rows.emplace_back(ParseMatch(row, precision), next);
      }
      a.local_transition = [rows](const LocalView& v, const ResolvedJoint& joint) {
        for (const auto& [m, next] : rows) {
          if ((m.local < 0 || m.local == v.loc) &&
              (m.percept < 0 || m.percept == v.per) && JointMatches(m.joint, joint)) {
            return next;
          }
        }
        return std::vector<std::pair<int, double>>{{v.loc, 1.0}};
      };
    }
    agents.push_back(std::move(a));
  }

  std::vector<std::pair<TabularMatch, RealVec>> env_rows;
  for (const json& row : Get<json>(j, "environment", json::array())) {
    env_rows.emplace_back(ParseMatch(row, precision), Get<RealVec>(row, "next", {}));
  }
  EnvTransitionFn env_fn = [env_rows, precision](const RealVec& env,
                                                 const ResolvedJoint& joint) {
    for (const auto& [m, next] : env_rows) {
      if (EnvMatches(m, env, precision) && JointMatches(m.joint, joint)) return next;
    }
    return env;
  };

  GameInstance inst;
  inst.model = NsCsg(std::move(agents), env_dim, env_fn);
  inst.model.SetPrecision(precision);
  inst.model.availability_on_refreshed_percept =
      Get<bool>(j, "availability_on_refreshed_percept", true);
  inst.horizon = Get<int>(j, "horizon", 0);
  const json init = Get<json>(j, "initial", json::object());
  for (const json& s : Get<json>(init, "agents", json::array())) {
    inst.initial.agents.push_back({Get<int>(s, "local", 0), Get<int>(s, "percept", 0)});
  }
  if (!init.contains("agents")) inst.initial.agents.assign(inst.model.num_agents(), {0, 0});
  inst.initial.env = Get<RealVec>(init, "env", RealVec(env_dim, 0.0));
  inst.model.CheckState(inst.initial);

  const json rewards = Get<json>(j, "rewards", json::array());
  if (!rewards.empty() && static_cast<int>(rewards.size()) != inst.model.num_agents()) {
    Fail(ErrorKind::kModel, "need one reward structure per agent");
  }
  for (const json& jr : rewards) {
    struct Row {
      TabularMatch match;
      std::vector<int> locals;  // per agent, -1: any
      double value;
    };
    auto parse = [precision](const json& rows) {
      std::vector<Row> out;
      for (const json& row : rows) {
        out.push_back({ParseMatch(row, precision),
                       Get<std::vector<int>>(row, "locals", {}),
                       Get<double>(row, "value", 0.0)});
      }
      return out;
    };
    auto locals_match = [](const Row& r, const GlobalState& s) {
      for (size_t i = 0; i < r.locals.size() && i < s.agents.size(); ++i) {
        if (r.locals[i] >= 0 && r.locals[i] != s.agents[i].loc) return false;
      }
      return true;
    };
    RewardStructure r;
    auto state_rows = parse(Get<json>(jr, "state", json::array()));
    auto action_rows = parse(Get<json>(jr, "action", json::array()));
    r.state = [state_rows, locals_match, precision](const GlobalState& s, StageInfo info) {
      for (const Row& row : state_rows) {
        if (EnvMatches(row.match, s.env, precision) && locals_match(row, s) &&
            (row.match.stage < 0 || row.match.stage == info.stage)) {
          return row.value;
        }
      }
      return 0.0;
    };
    r.action = [action_rows, locals_match, precision](
                   const GlobalState& s, const ResolvedJoint& a, StageInfo info) {
      for (const Row& row : action_rows) {
        if (EnvMatches(row.match, s.env, precision) && locals_match(row, s) &&
            JointMatches(row.match.joint, a) &&
            (row.match.stage < 0 || row.match.stage == info.stage)) {
          return row.value;
        }
      }
      return 0.0;
    };
    inst.rewards.push_back(std::move(r));
  }
  return inst;
}

}  // namespace internal

// ---------------------------------------------------------------------------
// Built-in parameters.

inline CounterexampleParams CounterexampleParamsFromJson(const json& j) {
  CounterexampleParams p;
  p.phi = internal::Get<double>(j, "phi", p.phi);
  return p;
}

inline std::set<TrafficRule> TrafficRulesFromJson(const json& rules) {
  std::set<TrafficRule> out;
  for (const json& r : rules) {
    const std::string d = internal::Get<std::string>(r, "direction", "");
    if (d.size() != 1 || std::string("UDLR").find(d[0]) == std::string::npos) {
      Fail(ErrorKind::kModel, "traffic rule direction must be U, D, L or R");
    }
    out.insert({internal::GetCell(r.at("cell")), d[0]});
  }
  return out;
}

inline json TrafficRulesToJson(const std::set<TrafficRule>& rules) {
  json out = json::array();
  for (const TrafficRule& r : rules) {
    out.push_back({{"cell", r.cell}, {"direction", std::string(1, r.direction)}});
  }
  return out;
}

inline ParkingParams ParkingParamsFromJson(const json& j) {
  using internal::Get;
  ParkingParams p;
  p.columns = Get<int>(j, "columns", p.columns);
  p.rows = Get<int>(j, "rows", p.rows);
  if (j.contains("slots")) {
    p.slots.clear();
    for (const json& c : j["slots"]) p.slots.push_back(internal::GetCell(c));
  }
  if (j.contains("start1")) p.start1 = internal::GetCell(j["start1"]);
  if (j.contains("start2")) p.start2 = internal::GetCell(j["start2"]);
  if (j.contains("bonus_cell")) p.bonus_cell = internal::GetCell(j["bonus_cell"]);
  p.bonus = Get<double>(j, "bonus", p.bonus);
  p.bonus_last_stage = Get<int>(j, "bonus_last_stage", p.bonus_last_stage);
  p.collision_reward = Get<double>(j, "collision_reward", p.collision_reward);
  p.step_reward = Get<double>(j, "step_reward", p.step_reward);
  if (j.contains("red")) {
    p.red.clear();
    for (const json& c : j["red"]) p.red.push_back(internal::GetCell(c));
  }
  if (j.contains("rules_file")) {
    p.forbidden = TrafficRulesFromJson(
        ReadJsonFile(j["rules_file"].get<std::string>()).at("forbidden"));
  }
  if (j.contains("forbidden")) p.forbidden = TrafficRulesFromJson(j["forbidden"]);
  p.reward_structure = Get<int>(j, "reward_structure", p.reward_structure);
  if (p.reward_structure != 1 && p.reward_structure != 2) {
    Fail(ErrorKind::kModel, "parking reward_structure must be 1 or 2");
  }
  p.horizon = Get<int>(j, "horizon", p.horizon);
  p.parked_is_absorbing = Get<bool>(j, "parked_is_absorbing", p.parked_is_absorbing);
  p.count_terminal_reward =
      Get<bool>(j, "count_terminal_reward", p.count_terminal_reward);
  return p;
}

inline VcasParams VcasParamsFromJson(const json& j) {
  using internal::Get;
  VcasParams p;
  p.h = Get<double>(j, "h", p.h);
  p.hdot_own = Get<double>(j, "hdot_own", p.hdot_own);
  p.hdot_int = Get<double>(j, "hdot_int", p.hdot_int);
  p.t = Get<int>(j, "t", p.t);
  p.eps_own = Get<double>(j, "eps_own", p.eps_own);
  p.eps_int = Get<double>(j, "eps_int", p.eps_int);
  p.trust_own = Get<int>(j, "trust_own", p.trust_own);
  p.trust_int = Get<int>(j, "trust_int", p.trust_int);
  p.advisory_own = Get<int>(j, "advisory_own", p.advisory_own);
  p.advisory_int = Get<int>(j, "advisory_int", p.advisory_int);
  const std::string reward = Get<std::string>(j, "reward", "trust-and-fuel");
  if (reward == "trust-and-fuel") {
    p.reward = VcasRewardKind::kTrustAndFuel;
  } else if (reward == "instant-altitude") {
    p.reward = VcasRewardKind::kInstantAltitude;
  } else {
    Fail(ErrorKind::kModel, "vcas reward must be trust-and-fuel or instant-altitude");
  }
  p.instant = Get<int>(j, "instant", p.instant);
  p.zero_sum = Get<bool>(j, "zero_sum", p.zero_sum);
  p.altitude_limit = Get<double>(j, "altitude_limit", p.altitude_limit);
  p.stub_seed = Get<std::uint64_t>(j, "stub_seed", p.stub_seed);
  if (j.contains("weights_dir")) p.nets = LoadVcasNets(j["weights_dir"].get<std::string>());
  return p;
}

// Builds a game from a built-in name ("counterexample", "parking", "vcas")
// or a model file. `params` overrides built-in parameters; a model file
// may itself name a built-in with {"builtin": ..., "params": {...}}.
inline GameInstance LoadInstance(const std::string& ref, const json& params = json::object()) {
  auto builtin = [](const std::string& name, const json& p) {
    if (name == "counterexample") return build_counterexample(CounterexampleParamsFromJson(p));
    if (name == "parking") return build_parking(ParkingParamsFromJson(p));
    if (name == "vcas") return build_vcas(VcasParamsFromJson(p));
    Fail(ErrorKind::kModel, "unknown built-in model " + name);
  };
  if (ref == "counterexample" || ref == "parking" || ref == "vcas") {
    return builtin(ref, params);
  }
  json j = ReadJsonFile(ref);
  if (j.contains("builtin")) {
    json p = internal::Get<json>(j, "params", json::object());
    for (const char* key : {"rules_file", "weights_dir"}) {
      if (p.contains(key)) {
        std::filesystem::path rel = p[key].get<std::string>();
        if (rel.is_relative()) {
          p[key] = (std::filesystem::path(ref).parent_path() / rel).string();
        }
      }
    }
    p.merge_patch(params);
    return builtin(j["builtin"].get<std::string>(), p);
  }
  return internal::BuildTabular(j);
}

// ---------------------------------------------------------------------------
// Solutions.

inline const char* TypeName(EquilibriumType t) {
  return t == EquilibriumType::kNash ? "ne" : "ce";
}

inline EquilibriumType ParseType(const std::string& s) {
  if (s == "ne") return EquilibriumType::kNash;
  if (s == "ce") return EquilibriumType::kCorrelated;
  Fail(ErrorKind::kModel, "equilibrium type must be ne or ce");
}

inline json SolutionToJson(const NsCsg& model, const GameGraph& g,
                           const EquilibriumSolution& sol) {
  json nodes = json::array();
  for (int id = 0; id < g.size(); ++id) {
    const GameNode& n = g.nodes[id];
    json entry = {{"id", id},
                  {"stage", n.stage},
                  {"state", StateToJson(n.state)},
                  {"value", sol.value[id]}};
    if (!n.is_leaf()) {
      json actions = json::array();
      for (int i = 0; i < static_cast<int>(n.actions.size()); ++i) {
        json labels = json::array();
        for (int a : n.actions[i]) labels.push_back(model.ActionLabel(i, a));
        actions.push_back(labels);
      }
      entry["actions"] = actions;
      const NodeStrategy& s = sol.strategy[id];
      if (!s.row.empty()) entry["row"] = s.row;
      if (!s.col.empty()) entry["col"] = s.col;
      entry["joint"] = s.joint;
    }
    nodes.push_back(entry);
  }
  return {{"type", TypeName(sol.type)},
          {"graph", g.kind == GraphKind::kTree ? "tree" : "region"},
          {"horizon", g.horizon},
          {"welfare", social_welfare(sol, g.root())},
          {"nodes", nodes}};
}

// Reads a solution written by SolutionToJson for the same game graph.
inline EquilibriumSolution SolutionFromJson(const GameGraph& g, const json& j) {
  EquilibriumSolution sol;
  sol.type = ParseType(internal::Get<std::string>(j, "type", "ne"));
  const json& nodes = j.at("nodes");
  if (static_cast<int>(nodes.size()) != g.size()) {
    Fail(ErrorKind::kPrecondition, "solution has " + std::to_string(nodes.size()) +
                                       " nodes, game has " + std::to_string(g.size()));
  }
  sol.strategy.assign(g.size(), {});
  sol.value.assign(g.size(), {0.0, 0.0});
  for (const json& e : nodes) {
    const int id = e.at("id").get<int>();
    if (id < 0 || id >= g.size() || e.at("stage").get<int>() != g.nodes[id].stage) {
      Fail(ErrorKind::kPrecondition, "solution node " + std::to_string(id) +
                                         " does not match the game");
    }
    sol.value[id] = e.at("value").get<Payoff>();
    NodeStrategy& s = sol.strategy[id];
    s.row = internal::Get<RealVec>(e, "row", {});
    s.col = internal::Get<RealVec>(e, "col", {});
    s.joint = internal::Get<RealVec>(e, "joint", {});
  }
  return sol;
}

inline json ReportToJson(const VerifyReport& r, double tol) {
  json gaps = json::array();
  for (int id = 0; id < static_cast<int>(r.gap.size()); ++id) {
    if (r.gap[id][0] > tol || r.gap[id][1] > tol) {
      gaps.push_back({{"id", id}, {"gap", r.gap[id]}});
    }
  }
  return {{"pass", r.pass},
          {"tol", tol},
          {"max_gap", r.max_gap},
          {"worst_node", r.worst_node},
          {"worst_agent", r.worst_agent < 0 ? -1 : r.worst_agent + 1},
          {"violations", gaps}};
}

inline std::string TraceToCsv(const std::vector<FsiTraceRow>& trace) {
  std::string out = "iteration,sw,history,status\n";
  for (const FsiTraceRow& row : trace) {
    out += std::to_string(row.iteration) + "," + FormatNumber(row.welfare) + "," +
           std::to_string(row.history) + "," + row.status + "\n";
  }
  return out;
}

}  // namespace nscsg
