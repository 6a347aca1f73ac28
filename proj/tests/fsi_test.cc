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

#include "nscsg/fsi.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "nscsg/benchmarks.hpp"
#include "nscsg/verify.hpp"
#include "test_util.h"

namespace nscsg {
namespace {

using testing::Prepare;
using testing::SmallRandomTree;
using testing::Unfolded;

// Pearson statistic for observed counts against a uniform expectation.
double ChiSquare(const std::map<int, int>& counts, int cells, int draws) {
  const double expect = double(draws) / cells;
  double chi = 0;
  for (const auto& [k, c] : counts) chi += (c - expect) * (c - expect) / expect;
  chi += (cells - counts.size()) * expect;  // empty cells
  return chi;
}

TEST(HistorySamplingTest, UniformLastStage) {
  std::vector<int> h = {3, 5, 8, 13};
  std::mt19937_64 rng(1);
  std::map<int, int> counts;
  const int draws = 40000;
  for (int k = 0; k < draws; ++k) ++counts[sample_history_uniform(h, rng)];
  EXPECT_EQ(counts.size(), 4u);
  // 99.9% quantile of chi-square with 3 degrees of freedom.
  EXPECT_LT(ChiSquare(counts, 4, draws), 16.27);
  std::vector<int> none;
  EXPECT_THROW(sample_history_uniform(none, rng), Error);
}

TEST(HistorySamplingTest, MaxWelfareGreedyAndExploring) {
  Unfolded u = Prepare(build_counterexample({-10}));
  EquilibriumSolution sol = run_gbi(u.graph, u.table, EquilibriumType::kNash);
  std::mt19937_64 rng(2);
  // Stage-1 welfare values are -8, -7, 8 and 0: greedy always picks node 4.
  for (int k = 0; k < 50; ++k) {
    int h = select_history_max_sw(u.graph, sol, 0.0, rng);
    EXPECT_EQ(CounterexampleNodeId(u.graph.nodes[h].state), 4);
  }
  std::map<int, int> counts;
  const int draws = 40000;
  for (int k = 0; k < draws; ++k) ++counts[select_history_max_sw(u.graph, sol, 1.0, rng)];
  EXPECT_LT(ChiSquare(counts, 4, draws), 16.27);
  // With epsilon 0.5 node 4 is hit with probability 1/2 + 1/8.
  int four = 0;
  for (int k = 0; k < draws; ++k) {
    int h = select_history_max_sw(u.graph, sol, 0.5, rng);
    four += CounterexampleNodeId(u.graph.nodes[h].state) == 4;
  }
  EXPECT_NEAR(double(four) / draws, 0.625, 0.01);

  GameGraph flat = unfold_tree(u.inst.model, u.inst.initial, 0);
  EquilibriumSolution leaf_only;
  leaf_only.value = {Payoff{0, 0}};
  EXPECT_THROW(select_history_max_sw(flat, leaf_only, 0.1, rng), Error);
}

TEST(FreezePartitionTest, TreePrefix) {
  Unfolded u = SmallRandomTree(3, 3, 2000);
  const GameGraph& g = u.graph;
  for (int h : g.stages[g.horizon - 1]) {
    Partition p = freeze_partition(g, h);
    std::set<int> expect;
    for (int n = h; n >= 0; n = g.nodes[n].parent) expect.insert(n);
    EXPECT_EQ(std::set<int>(p.free.begin(), p.free.end()), expect);
    EXPECT_EQ(p.free.size() + p.frozen.size(), size_t(g.size()));
    for (int n : p.frozen) EXPECT_FALSE(expect.count(n));
  }
}

TEST(FreezePartitionTest, RegionAncestors) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GameInstance inst = testing::RandomGame(seed, 3);
    GameGraph g = unfold_regions(inst.model, inst.initial, 3);
    // Reverse reachability computed from the outcome lists.
    std::vector<std::vector<int>> parents(g.size());
    for (int n = 0; n < g.size(); ++n) {
      for (int c : g.succ(n)) parents[c].push_back(n);
    }
    for (int h : g.stages[2]) {
      std::set<int> expect = {h};
      std::vector<int> stack = {h};
      while (!stack.empty()) {
        int n = stack.back();
        stack.pop_back();
        for (int p : parents[n]) {
          if (expect.insert(p).second) stack.push_back(p);
        }
      }
      Partition p = freeze_partition(g, h);
      EXPECT_EQ(std::set<int>(p.free.begin(), p.free.end()), expect);
      EXPECT_EQ(p.free.size() + p.frozen.size(), size_t(g.size()));
    }
  }
}

TEST(FsiTest, ZeroIterationsIsBackwardInduction) {
  Unfolded u = Prepare(build_counterexample({-10}));
  FsiConfig cfg;
  cfg.m_max = 0;
  FsiResult r = run_fsi(u.graph, u.table, EquilibriumType::kNash, cfg);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.trace[0].status, "init");
  EXPECT_DOUBLE_EQ(r.trace[0].welfare, -8);
  EquilibriumSolution gbi = run_gbi(u.graph, u.table, EquilibriumType::kNash);
  EXPECT_EQ(r.solution.value, gbi.value);
}

TEST(FsiTest, RejectsBadConfig) {
  Unfolded u = Prepare(build_counterexample({-10}));
  FsiConfig cfg;
  cfg.m_max = -1;
  EXPECT_THROW(run_fsi(u.graph, u.table, EquilibriumType::kNash, cfg), Error);
  cfg.m_max = 1;
  cfg.epsilon = 1.5;
  EXPECT_THROW(run_fsi(u.graph, u.table, EquilibriumType::kNash, cfg), Error);
}

TEST(FsiTest, CounterexampleReachesTheOptimum) {
  Unfolded u = Prepare(build_counterexample({-10}));
  for (FsiSolver solver : {FsiSolver::kGrid, FsiSolver::kReselect}) {
    FsiConfig cfg;
    cfg.solver = solver;
    cfg.m_max = 20;
    FsiResult r = run_fsi(u.graph, u.table, EquilibriumType::kNash, cfg);
    EXPECT_NEAR(social_welfare(r.solution, 0), 7, 1e-9);
    EXPECT_TRUE(check_spne(u.graph, u.table, r.solution).pass);
  }
  // Greedy history selection goes straight to node 4.
  FsiConfig greedy;
  greedy.solver = FsiSolver::kGrid;
  greedy.policy = HistoryPolicy::kMaxWelfare;
  greedy.epsilon = 0.0;
  greedy.m_max = 1;
  FsiResult r = run_fsi(u.graph, u.table, EquilibriumType::kNash, greedy);
  EXPECT_EQ(r.trace[1].status, "improved");
  EXPECT_NEAR(r.trace[1].welfare, 7, 1e-9);
}

TEST(FsiTest, ParkingNashImproves) {
  ParkingParams p;
  p.horizon = 8;
  Unfolded u = Prepare(build_parking(p), /*tree=*/false);
  FsiConfig cfg;
  cfg.solver = FsiSolver::kReselect;
  FsiResult r = run_fsi(u.graph, u.table, EquilibriumType::kNash, cfg);
  EXPECT_NEAR(r.trace.front().welfare, -5.0, 1e-6);
  EXPECT_NEAR(social_welfare(r.solution, 0), -4.5, 1e-6);
  EXPECT_TRUE(check_spne(u.graph, u.table, r.solution).pass);
}

TEST(FsiTest, IteratesAreEquilibriaAndWelfareNeverDrops) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    Unfolded u = SmallRandomTree(seed, 3, 300);
    if (u.graph.horizon < 1) continue;
    for (auto type : {EquilibriumType::kNash, EquilibriumType::kCorrelated}) {
      for (auto solver : {FsiSolver::kCoordinateAscent, FsiSolver::kReselect}) {
        for (auto policy : {HistoryPolicy::kUniformLastStage, HistoryPolicy::kMaxWelfare}) {
          FsiConfig cfg;
          cfg.seed = seed;
          cfg.m_max = 4;
          cfg.solver = solver;
          cfg.policy = policy;
          cfg.init_policy = SelectionPolicy::kFirstFound;
          int calls = 0;
          cfg.on_iteration = [&](int m, const EquilibriumSolution& s) {
            EXPECT_EQ(m, calls++);
            EXPECT_TRUE(CheckEquilibrium(u.graph, u.table, s).pass) << seed;
          };
          FsiResult r = run_fsi(u.graph, u.table, type, cfg);
          EXPECT_EQ(calls, 5);
          ASSERT_EQ(r.trace.size(), 5u);
          for (size_t k = 1; k < r.trace.size(); ++k) {
            EXPECT_GE(r.trace[k].welfare, r.trace[k - 1].welfare - 1e-9);
            EXPECT_EQ(r.trace[k].iteration, int(k));
          }
          EXPECT_NEAR(r.trace.back().welfare, social_welfare(r.solution, 0), 1e-12);
        }
      }
    }
  }
}

TEST(FsiTest, SameSeedSameTrace) {
  Unfolded u = SmallRandomTree(5, 3, 500);
  FsiConfig cfg;
  cfg.seed = 42;
  cfg.m_max = 6;
  cfg.solver = FsiSolver::kReselect;
  FsiResult a = run_fsi(u.graph, u.table, EquilibriumType::kCorrelated, cfg);
  FsiResult b = run_fsi(u.graph, u.table, EquilibriumType::kCorrelated, cfg);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (size_t k = 0; k < a.trace.size(); ++k) {
    EXPECT_EQ(a.trace[k].history, b.trace[k].history);
    EXPECT_EQ(a.trace[k].welfare, b.trace[k].welfare);
  }
}

}  // namespace
}  // namespace nscsg
