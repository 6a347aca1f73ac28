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

// Backward induction with locally optimal stage equilibria can miss the
// welfare-optimal subgame-perfect equilibrium. This sample prints both on
// the two-stage game, then rolls out stub-network VCAS strategies.

#include <cstdio>

#include "nscsg/nscsg.hpp"

int main() {
  using namespace nscsg;

  GameInstance game = build_counterexample({-10.0});
  GameGraph tree = unfold_tree(game.model, game.initial, game.horizon);
  RewardTable table = BuildRewardTable(game.model, tree, game.rewards);

  EquilibriumSolution gbi = run_gbi(tree, table, EquilibriumType::kNash);
  GridOptions grid_opts;
  grid_opts.resolution = 5;
  auto best = solve_exact_grid(tree, table, EquilibriumType::kNash, grid_opts);
  std::printf("backward induction: SW %s\n", FormatNumber(social_welfare(gbi, 0)).c_str());
  if (best) std::printf("grid optimum:       SW %s\n", FormatNumber(best->welfare).c_str());

  FsiConfig cfg;
  cfg.m_max = 5;
  cfg.solver = FsiSolver::kGrid;
  FsiResult fsi = run_fsi(tree, table, EquilibriumType::kNash, cfg);
  for (const FsiTraceRow& row : fsi.trace) {
    std::printf("fsi iteration %d: SW %s (%s)\n", row.iteration,
                FormatNumber(row.welfare).c_str(), row.status.c_str());
  }

  VcasParams vp;
  vp.t = 2;
  GameInstance vcas = build_vcas(vp);
  GameGraph g = unfold_regions(vcas.model, vcas.initial, vcas.horizon);
  RewardTable t = BuildRewardTable(vcas.model, g, vcas.rewards);
  EquilibriumSolution ce = run_gbi(g, t, EquilibriumType::kCorrelated);
  SimulateOptions so;
  so.seed = 7;
  std::printf("%s", FormatPath(vcas.model, simulate(vcas.model, g, t, ce, so)).c_str());
  return 0;
}
