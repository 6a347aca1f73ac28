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

// Command-line front end: unfold, solve, verify and plotdata.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nscsg/cli.hpp"

namespace {

void AddModelFlags(CLI::App* cmd, nscsg::cli::Options& o) {
  cmd->add_option("model,--model", o.model,
                  "Built-in name (counterexample, parking, vcas) or model JSON file")
      ->required();
  cmd->add_option("--params", o.params, "Built-in parameters, inline JSON or a file");
  cmd->add_option("-K,--horizon", o.horizon, "Number of stages");
  cmd->add_option("--phi", o.phi, "Counterexample parameter phi");
  cmd->add_option("--precision", o.precision, "Decimal digits used to merge states");
  cmd->add_option("--mode", o.mode, "tree or region")->check(CLI::IsMember({"tree", "region"}));
  cmd->add_option("--max-nodes", o.max_nodes, "Unfolding node cap");
  cmd->add_option("--threads", o.threads, "Worker threads");
  cmd->add_option("--seed", o.seed, "Random seed");
}

}  // namespace

int main(int argc, char** argv) {
  using nscsg::cli::Options;
  CLI::App app{"Equilibrium synthesis for neuro-symbolic concurrent stochastic games"};
  app.require_subcommand(1);
  Options o;

  CLI::App* unfold = app.add_subcommand("unfold", "Unfold a game and print its size");
  AddModelFlags(unfold, o);
  unfold->add_flag("--with-sink", o.with_sink, "Count the absorbing state closing the horizon");
  unfold->add_option("--out", o.out, "Write the graph as JSON");

  CLI::App* solve = app.add_subcommand("solve", "Synthesize an equilibrium");
  AddModelFlags(solve, o);
  solve->add_option("--algo", o.algo, "gbi, fsi, exact or minimax")
      ->check(CLI::IsMember({"gbi", "fsi", "exact", "minimax"}));
  solve->add_option("--type", o.type, "ne or ce")->check(CLI::IsMember({"ne", "ce"}));
  solve->add_option("--cfg", o.cfg, "FSI configuration, inline JSON or a file");
  solve->add_option("--mmax", o.mmax, "FSI iterations");
  solve->add_option("--epsilon", o.epsilon, "Exploration rate of the max-sw history policy");
  solve->add_option("--grid-res", o.grid_res, "Grid resolution d");
  solve->add_option("--solver", o.solver, "FSI subproblem solver: ca, grid or reselect");
  solve->add_option("--policy", o.policy, "FSI history policy: uniform or max-sw");
  solve->add_option("--selection", o.selection,
                    "Stage equilibrium selection: sw-optimal, first-found, seeded-random");
  solve->add_option("--tol", o.tol, "Tolerance of the equilibrium check");
  solve->add_option("--out", o.out, "Write the solution as JSON");
  solve->add_option("--trace", o.trace, "Write the FSI welfare trace as CSV");
  solve->add_option("--dump", o.dump, "Write the constraint system as text");

  CLI::App* verify = app.add_subcommand("verify", "Check a solution file");
  AddModelFlags(verify, o);
  verify->add_option("solution,--solution", o.solution, "Solution JSON")->required();
  verify->add_option("--tol", o.tol, "Tolerance");
  verify->add_option("--report", o.report, "Write the report as JSON");

  CLI::App* plot = app.add_subcommand("plotdata", "Emit CSV data for altitude curves and traces");
  AddModelFlags(plot, o);
  plot->add_option("--runs", o.runs, "Runs spec, inline JSON or a file");
  plot->add_option("--out", o.out, "Altitude CSV (stdout when omitted)");
  plot->add_option("--trace", o.trace, "FSI trace CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nscsg::cli::kExitModel;
  }
  if (unfold->parsed()) return nscsg::cli::RunUnfold(o, std::cout, std::cerr);
  if (solve->parsed()) return nscsg::cli::RunSolve(o, std::cout, std::cerr);
  if (verify->parsed()) return nscsg::cli::RunVerify(o, std::cout, std::cerr);
  return nscsg::cli::RunPlotdata(o, std::cout, std::cerr);
}
