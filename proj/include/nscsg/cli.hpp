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

#include <chrono>
#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nscsg/error.hpp"
#include "nscsg/fsi.hpp"
#include "nscsg/gbi.hpp"
#include "nscsg/io.hpp"
#include "nscsg/speprog.hpp"
#include "nscsg/unfold.hpp"
#include "nscsg/verify.hpp"

namespace nscsg {
namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitModel = 2;
inline constexpr int kExitResource = 3;
inline constexpr int kExitSolver = 4;

struct Options {
  // Model selection.
  std::string model;
  std::string params;  // inline JSON or a file
  std::optional<int> horizon;
  std::optional<double> phi;
  std::optional<int> precision;
  std::string mode = "region";  // tree | region
  long long max_nodes = 5'000'000;

  // unfold
  bool with_sink = false;

  // solve
  std::string algo = "gbi";  // gbi | fsi | exact | minimax
  std::string type = "ne";   // ne | ce
  std::string cfg;           // FsiConfig overrides, inline JSON or a file
  std::optional<std::uint64_t> seed;
  std::optional<int> mmax;
  std::optional<double> epsilon;
  std::optional<int> grid_res;
  std::optional<std::string> solver;  // ca | grid | reselect
  std::optional<std::string> policy;  // uniform | max-sw
  std::optional<std::string> selection;  // sw-optimal | first-found | seeded-random
  int threads = 1;
  std::string out;
  std::string trace;
  std::string dump;

  // verify
  std::string solution;
  double tol = 1e-6;
  std::string report;

  // plotdata
  std::string runs;
};

inline int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kResource: return kExitResource;
    case ErrorKind::kSolver: return kExitSolver;
    default: return kExitModel;
  }
}

// Runs `body`, mapping library errors onto the exit-code contract.
template <typename F>
int Guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitModel;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kExitResource;
  }
}

inline GameInstance LoadModel(const Options& o) {
  if (o.model.empty()) Fail(ErrorKind::kModel, "no model given");
  json params = ParseJsonArgument(o.params);
  if (o.phi) params["phi"] = *o.phi;
  const bool parking = o.model == "parking";
  const bool vcas = o.model == "vcas";
  if (o.horizon && parking) params["horizon"] = *o.horizon;
  if (o.horizon && vcas) params["t"] = *o.horizon;
  GameInstance inst = LoadInstance(o.model, params);
  if (o.horizon) {
    if (*o.horizon < 0) Fail(ErrorKind::kPrecondition, "-K must be >= 0");
    inst.horizon = *o.horizon;
  }
  if (o.precision) inst.model.SetPrecision(*o.precision);
  return inst;
}

inline GraphKind ParseMode(const std::string& mode) {
  if (mode == "tree") return GraphKind::kTree;
  if (mode == "region") return GraphKind::kRegion;
  Fail(ErrorKind::kModel, "mode must be tree or region");
}

inline GameGraph Build(const GameInstance& inst, GraphKind kind, long long max_nodes) {
  UnfoldOptions uo;
  uo.max_nodes = max_nodes;
  return kind == GraphKind::kTree ? unfold_tree(inst.model, inst.initial, inst.horizon, uo)
                                  : unfold_regions(inst.model, inst.initial, inst.horizon, uo);
}

inline SelectionPolicy ParseSelection(const std::string& s) {
  if (s == "sw-optimal") return SelectionPolicy::kSwOptimal;
  if (s == "first-found") return SelectionPolicy::kFirstFound;
  if (s == "seeded-random") return SelectionPolicy::kSeededRandom;
  Fail(ErrorKind::kModel, "selection must be sw-optimal, first-found or seeded-random");
}

inline FsiSolver ParseSolver(const std::string& s) {
  if (s == "ca" || s == "coordinate-ascent") return FsiSolver::kCoordinateAscent;
  if (s == "grid") return FsiSolver::kGrid;
  if (s == "reselect") return FsiSolver::kReselect;
  Fail(ErrorKind::kModel, "solver must be ca, grid or reselect");
}

inline HistoryPolicy ParsePolicy(const std::string& s) {
  if (s == "uniform") return HistoryPolicy::kUniformLastStage;
  if (s == "max-sw") return HistoryPolicy::kMaxWelfare;
  Fail(ErrorKind::kModel, "policy must be uniform or max-sw");
}

// Defaults, then the cfg JSON, then explicit flags.
inline FsiConfig MakeFsiConfig(const Options& o) {
  FsiConfig c;
  c.solver = FsiSolver::kReselect;
  json j = ParseJsonArgument(o.cfg);
  using internal::Get;
  c.m_max = Get<int>(j, "m_max", c.m_max);
  if (j.contains("policy")) c.policy = ParsePolicy(j["policy"].get<std::string>());
  c.epsilon = Get<double>(j, "epsilon", c.epsilon);
  c.seed = Get<std::uint64_t>(j, "seed", c.seed);
  if (j.contains("solver")) c.solver = ParseSolver(j["solver"].get<std::string>());
  c.rounds = Get<int>(j, "rounds", c.rounds);
  c.grid_resolution = Get<int>(j, "grid_resolution", c.grid_resolution);
  if (j.contains("init_policy")) {
    c.init_policy = ParseSelection(j["init_policy"].get<std::string>());
  }
  c.feasibility_tol = Get<double>(j, "feasibility_tol", c.feasibility_tol);
  c.improvement_tol = Get<double>(j, "improvement_tol", c.improvement_tol);
  c.threads = Get<int>(j, "threads", o.threads);
  if (o.mmax) c.m_max = *o.mmax;
  if (o.policy) c.policy = ParsePolicy(*o.policy);
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (o.seed) c.seed = *o.seed;
  if (o.solver) c.solver = ParseSolver(*o.solver);
  if (o.grid_res) c.grid_resolution = *o.grid_res;
  if (o.selection) c.init_policy = ParseSelection(*o.selection);
  return c;
}

inline double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// Prints "nodes,transitions,build_seconds"; with_sink reports the counts
// of the horizon-closed encoding instead.
inline int RunUnfold(const Options& o, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    GameInstance inst = LoadModel(o);
    GameGraph g = Build(inst, ParseMode(o.mode), o.max_nodes);
    GraphStats st = stats(g);
    const long long nodes = o.with_sink ? st.nodes_with_sink() : st.nodes;
    const long long trans = o.with_sink ? st.transitions_with_sink() : st.transitions;
    out << nodes << "," << trans << "," << FormatNumber(st.build_seconds) << "\n";
    if (!o.out.empty()) WriteTextFile(o.out, GraphToJson(inst.model, g).dump(1) + "\n");
    return kExitOk;
  });
}

struct SolveOutcome {
  GameInstance inst;
  GameGraph graph;
  RewardTable table;
  EquilibriumSolution solution;
  std::vector<FsiTraceRow> trace;
};

inline SolveOutcome Solve(const Options& o) {
  SolveOutcome r{LoadModel(o), {}, {}, {}, {}};
  r.graph = Build(r.inst, ParseMode(o.mode), o.max_nodes);
  r.table = BuildRewardTable(r.inst.model, r.graph, r.inst.rewards);
  const EquilibriumType type = ParseType(o.type);
  if (o.algo == "gbi") {
    GbiOptions go;
    go.policy = ParseSelection(o.selection.value_or("sw-optimal"));
    go.seed = o.seed.value_or(0);
    go.threads = o.threads;
    r.solution = run_gbi(r.graph, r.table, type, go);
  } else if (o.algo == "fsi") {
    FsiResult f = run_fsi(r.graph, r.table, type, MakeFsiConfig(o));
    r.solution = std::move(f.solution);
    r.trace = std::move(f.trace);
  } else if (o.algo == "exact") {
    GridOptions go;
    go.resolution = o.grid_res.value_or(5);
    auto best = solve_exact_grid(r.graph, r.table, type, go);
    if (!best) Fail(ErrorKind::kSolver, "no grid point satisfies the constraints");
    r.solution = std::move(best->solution);
  } else if (o.algo == "minimax") {
    r.solution = run_minimax(r.graph, r.table, o.threads);
  } else {
    Fail(ErrorKind::kModel, "algo must be gbi, fsi, exact or minimax");
  }
  return r;
}

// Prints "sw=.. v1=.. v2=.. check=pass|fail seconds=..".
inline int RunSolve(const Options& o, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    const auto start = std::chrono::steady_clock::now();
    SolveOutcome r = Solve(o);
    const double seconds = Seconds(start);
    const Payoff& v = r.solution.value[r.graph.root()];
    std::string check = "n/a";
    if (o.algo != "minimax") {
      check = CheckEquilibrium(r.graph, r.table, r.solution, o.tol).pass ? "pass" : "fail";
    }
    out << "sw=" << FormatNumber(v[0] + v[1]) << " v1=" << FormatNumber(v[0])
        << " v2=" << FormatNumber(v[1]) << " check=" << check
        << " seconds=" << FormatNumber(seconds) << "\n";
    if (!o.out.empty()) {
      json j = SolutionToJson(r.inst.model, r.graph, r.solution);
      j["algo"] = o.algo;
      WriteTextFile(o.out, j.dump(1) + "\n");
    }
    if (!o.trace.empty()) WriteTextFile(o.trace, TraceToCsv(r.trace));
    if (!o.dump.empty()) {
      WriteTextFile(o.dump, DumpSystem(BuildSystem(r.graph, r.table, ParseType(o.type))));
    }
    return kExitOk;
  });
}

// Prints "verdict=pass|fail max_gap=.. worst_node=.. worst_agent=..".
inline int RunVerify(const Options& o, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    json j = ReadJsonFile(o.solution);
    Options opts = o;
    opts.horizon = internal::Get<int>(j, "horizon", 0);
    GameInstance inst = LoadModel(opts);
    const GraphKind kind = ParseMode(internal::Get<std::string>(j, "graph", "region"));
    GameGraph g = Build(inst, kind, o.max_nodes);
    RewardTable t = BuildRewardTable(inst.model, g, inst.rewards);
    EquilibriumSolution sol = SolutionFromJson(g, j);
    VerifyReport rep = CheckEquilibrium(g, t, sol, o.tol);
    out << "verdict=" << (rep.pass ? "pass" : "fail")
        << " max_gap=" << FormatNumber(rep.max_gap) << " worst_node=" << rep.worst_node
        << " worst_agent=" << (rep.worst_agent < 0 ? -1 : rep.worst_agent + 1) << "\n";
    if (!o.report.empty()) WriteTextFile(o.report, ReportToJson(rep, o.tol).dump(1) + "\n");
    return rep.pass ? kExitOk : kExitCheckFailed;
  });
}

// Altitude curves (first environment component along a simulated path)
// for NE, CE and zero-sum strategies of every run, plus FSI welfare traces.
// Runs spec: {"runs": [{"name": .., "params": {..}, "seed": .., "fsi": {..}}]}.
inline int RunPlotdata(const Options& o, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    json spec = ParseJsonArgument(o.runs);
    const json runs = spec.is_array() ? spec : internal::Get<json>(spec, "runs", json::array());
    std::string curves = "run,strategy,k,h\n";
    std::string traces = "run,type,iteration,sw,history,status\n";
    for (size_t r = 0; r < runs.size(); ++r) {
      const json& run = runs[r];
      const std::string name = internal::Get<std::string>(run, "name", "run" + std::to_string(r));
      Options ro = o;
      json params = ParseJsonArgument(o.params);
      params.merge_patch(internal::Get<json>(run, "params", json::object()));
      ro.params = params.dump();
      if (run.contains("K")) ro.horizon = run["K"].get<int>();
      const std::uint64_t seed = internal::Get<std::uint64_t>(run, "seed", o.seed.value_or(0));
      GameInstance inst = LoadModel(ro);
      GameGraph g = Build(inst, ParseMode(ro.mode), ro.max_nodes);
      RewardTable t = BuildRewardTable(inst.model, g, inst.rewards);
      GbiOptions go;
      go.threads = o.threads;
      const std::vector<std::pair<std::string, EquilibriumSolution>> strategies = {
          {"ne", run_gbi(g, t, EquilibriumType::kNash, go)},
          {"ce", run_gbi(g, t, EquilibriumType::kCorrelated, go)},
          {"zero-sum", run_minimax(g, t, o.threads)}};
      for (const auto& [label, sol] : strategies) {
        SimulateOptions so;
        so.seed = seed;
        SimulationResult sim = simulate(inst.model, g, t, sol, so);
        for (size_t k = 0; k < sim.path.states.size(); ++k) {
          const RealVec& env = sim.path.states[k].env;
          curves += name + "," + label + "," + std::to_string(k) + "," +
                    (env.empty() ? std::string("nan") : FormatNumber(env[0])) + "\n";
        }
      }
      if (run.contains("fsi")) {
        Options fo = ro;
        fo.cfg = run["fsi"].dump();
        const std::string type = internal::Get<std::string>(run["fsi"], "type", "ne");
        FsiResult f = run_fsi(g, t, ParseType(type), MakeFsiConfig(fo));
        for (const FsiTraceRow& row : f.trace) {
          traces += name + "," + type + "," + std::to_string(row.iteration) + "," +
                    FormatNumber(row.welfare) + "," + std::to_string(row.history) + "," +
                    row.status + "\n";
        }
      }
    }
    if (o.out.empty()) {
      out << curves;
    } else {
      WriteTextFile(o.out, curves);
    }
    if (!o.trace.empty()) WriteTextFile(o.trace, traces);
    return kExitOk;
  });
}

}  // namespace cli
}  // namespace nscsg
