// Copyright 2026 The Stalesim Authors.
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

#include "stalesim/sim_engine.h"

#include <gtest/gtest.h>

#include <set>

#include "json.hpp"

namespace stalesim {
namespace {

using nlohmann::json;

ExperimentConfig Small() {
  ExperimentConfig c;
  c.batch_size = 8;
  c.group_size = 2;
  c.num_instances = 2;
  c.num_training_steps = 6;
  return c;
}

std::vector<json> Parse(const std::vector<std::string>& trace) {
  std::vector<json> out;
  for (const std::string& line : trace) out.push_back(json::parse(line));
  return out;
}

TEST(SimEngineTest, SynchronousDegenerateCycle) {
  ExperimentConfig c;
  c.eta = 0;
  c.batch_size = 1;
  c.group_size = 1;
  c.num_instances = 1;
  c.num_training_steps = 3;
  c.lengths.median = 10;
  c.lengths.sigma = 0.0;
  const RunResult r = run_simulation(c, 1);
  std::vector<std::string> seq;
  for (const json& rec : Parse(r.trace)) {
    const std::string kind = rec["kind"];
    if (kind == "generated" || kind == "consume" || kind == "train_done" ||
        kind == "push_done") {
      seq.push_back(kind);
    } else if (kind == "effect" && rec["cmd"] == "Pull") {
      seq.push_back("pulled");
    }
  }
  std::vector<std::string> want;
  for (int i = 0; i < 3; ++i) {
    if (i > 0) want.push_back("pulled");
    for (const char* k : {"generated", "consume", "train_done", "push_done"}) {
      want.push_back(k);
    }
  }
  // The run ends with the last training step; nothing is pushed after it.
  want.pop_back();
  EXPECT_EQ(seq, want);
  for (const StepRecord& s : r.summary.steps) {
    EXPECT_EQ(s.max_len, 10);
    EXPECT_EQ(s.staleness.size(), 1u);
    EXPECT_EQ(s.staleness.begin()->first, 0);
  }
}

TEST(SimEngineTest, DeterministicPerSeed) {
  const ExperimentConfig c = Small();
  const RunResult a = run_simulation(c, 7);
  const RunResult b = run_simulation(c, 7);
  const RunResult d = run_simulation(c, 8);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.summary.to_json(), b.summary.to_json());
  EXPECT_NE(a.trace, d.trace);
}

TEST(SimEngineTest, StalenessNeverExceedsBound) {
  ExperimentConfig c = Small();
  c.num_training_steps = 12;
  const RunResult r = run_simulation(c, 3);
  ASSERT_EQ(r.summary.steps.size(), 12u);
  for (const auto& [staleness, n] : r.summary.staleness) {
    EXPECT_GE(staleness, 0);
    EXPECT_LE(staleness, c.eta);
  }
  EXPECT_EQ(r.summary.consumed, 12 * 8 * 2);
  EXPECT_GT(r.summary.throughput, 0.0);
}

TEST(SimEngineTest, AbortedTrajectoriesNeverReappear) {
  ExperimentConfig c = Small();
  c.redundancy = RedundancyLevel::kGroup;
  c.redundancy_ratio = 0.5;
  const RunResult r = run_simulation(c, 2);
  EXPECT_GT(r.summary.aborted, 0);
  std::set<TrajId> aborted;
  for (const json& rec : Parse(r.trace)) {
    const std::string kind = rec["kind"];
    if (kind == "aborted") {
      aborted.insert(rec["traj"].get<TrajId>());
    } else if (kind == "generated") {
      EXPECT_FALSE(aborted.contains(rec["traj"].get<TrajId>()));
    } else if (kind == "command" && rec["cmd"] == "Route") {
      for (const json& t : rec["trajs"]) {
        EXPECT_FALSE(aborted.contains(t.get<TrajId>()));
      }
    } else if (kind == "consume") {
      for (const json& m : rec["members"]) {
        EXPECT_FALSE(aborted.contains(m[0].get<TrajId>()));
      }
    }
  }
}

TEST(SimEngineTest, IdleSnapshotIsEmpty) {
  Simulator sim(Small(), 1);
  for (const InstanceSnapshot& s : sim.collect_snapshot()) {
    EXPECT_EQ(s.traj_count(), 0);
    EXPECT_EQ(s.inst_version, 0);
    EXPECT_EQ(s.kv_cache, 0.0);
  }
}

TEST(SimEngineTest, SnapshotMatchesGroundTruth) {
  const ExperimentConfig c = Small();
  Simulator sim(c, 5);
  const CostCoefficients cost = c.cost();
  int checked = 0;
  for (int i = 0; sim.step(); ++i) {
    if (i % 97 != 0) continue;
    std::set<TrajId> seen;
    for (const InstanceSnapshot& s : sim.collect_snapshot()) {
      double kv = 0.0;
      for (TrajId id : s.run) {
        EXPECT_TRUE(seen.insert(id).second);
        kv += cost.k5 * sim.trajectory_server().get(id).total_len();
      }
      for (TrajId id : s.wait) {
        EXPECT_TRUE(seen.insert(id).second);
        EXPECT_FALSE(sim.trajectory_server().in_pool(id));
      }
      EXPECT_NEAR(s.kv_cache, kv, 1e-6);
      EXPECT_LE(s.kv_cache, cost.M);
    }
    ++checked;
  }
  EXPECT_GT(checked, 10);
  EXPECT_TRUE(sim.finished());
}

TEST(SimEngineTest, SummaryJsonCarriesThroughput) {
  const RunResult r = run_simulation(Small(), 1);
  const json j = json::parse(r.summary.to_json());
  EXPECT_TRUE(j.contains("throughput"));
  EXPECT_EQ(j["steps"].size(), 6u);
  EXPECT_NE(r.ledger_dump.find("ledger eta=3"), std::string::npos);
}

}  // namespace
}  // namespace stalesim
