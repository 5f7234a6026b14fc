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

#include "stalesim/coordinator.h"

#include <gtest/gtest.h>

namespace stalesim {
namespace {

const CostCoefficients kCost = CostCoefficients::reference();

LedgerConfig Cfg(int eta, int batch, int group) {
  LedgerConfig c;
  c.eta = eta;
  c.batch_size = batch;
  c.group_size = group;
  return c;
}

InstanceSnapshot Inst(InstanceId id, Version v, int run = 0, int wait = 0,
                      TrajId base = 1000) {
  InstanceSnapshot s;
  s.id = id;
  s.inst_version = v;
  for (int i = 0; i < run; ++i) {
    s.run.push_back(base + i);
    s.kv_cache += 300;
  }
  for (int i = 0; i < wait; ++i) s.wait.push_back(base + run + i);
  return s;
}

TsTrajectory Fresh(TrajId id, GroupKey g) { return {id, g, std::nullopt, 300}; }
TsTrajectory Partial(TrajId id, GroupKey g, Version v) { return {id, g, v, 300}; }

TsView View(std::vector<TsTrajectory> trajs) {
  TsView v;
  for (const TsTrajectory& t : trajs) v.members[t.group].push_back(t.id);
  v.trajs = std::move(trajs);
  return v;
}

TEST(SuiteFlagsTest, ParseAndName) {
  EXPECT_EQ(SuiteFlags::parse("staleflow"), (SuiteFlags{true, true, true}));
  EXPECT_EQ(SuiteFlags::parse("vanilla"), (SuiteFlags{false, false, false}));
  EXPECT_EQ(SuiteFlags::parse("mixed:RM"), (SuiteFlags{true, false, true}));
  EXPECT_EQ(SuiteFlags::parse("mixed:RM").name(), "mixed:RM");
  EXPECT_THROW(SuiteFlags::parse("mixed:X"), Error);
  EXPECT_THROW(SuiteFlags::parse("fast"), Error);
}

TEST(ValidateSnapshotTest, StartupAccepts) {
  SpeculativeState p{{0, {}}, {1, {}}};
  EXPECT_TRUE(validate_snapshot({Inst(0, 0), Inst(1, 0)}, p));
}

TEST(ValidateSnapshotTest, PendingPullRejects) {
  SpeculativeState p{{0, {}}};
  p = record_command(p, {CommandKind::kPull, 0, {}}, 4);
  EXPECT_FALSE(validate_snapshot({Inst(0, 3)}, p));
  EXPECT_TRUE(validate_snapshot({Inst(0, 4)}, p));
}

TEST(ValidateSnapshotTest, RouteCountedOnceArrived) {
  SpeculativeState p{{0, {}}};
  p = record_command(p, {CommandKind::kRoute, 0, {1, 2, 3, 4, 5}}, 0);
  EXPECT_FALSE(validate_snapshot({Inst(0, 0, 2, 0)}, p));
  InstanceSnapshot s = Inst(0, 0, 2, 2);
  s.complete.push_back(77);
  EXPECT_TRUE(validate_snapshot({s}, p));
}

TEST(ValidateSnapshotTest, InstanceMismatch) {
  SpeculativeState p{{0, {}}};
  try {
    validate_snapshot({Inst(0, 0), Inst(1, 0)}, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInstanceMismatch);
  }
}

TEST(RecordCommandTest, TableRules) {
  SpeculativeState p{{1, {0, 10}}, {2, {1, 7}}};
  p = record_command(p, {CommandKind::kPull, 2, {}}, 4);
  EXPECT_EQ(p.at(2), (SpeculativeEntry{4, 0}));
  p = record_command(p, {CommandKind::kRoute, 1, {1, 2, 3}}, 4);
  EXPECT_EQ(p.at(1).accum, 13);
  p = record_command(p, {CommandKind::kAbort, 1, {1}}, 4);
  EXPECT_EQ(p.at(1).accum, 12);
  try {
    record_command(p, {CommandKind::kInterrupt, 2, {1}}, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNegativeCount);
  }
  EXPECT_THROW(record_command(p, {CommandKind::kPull, 9, {}}, 4), Error);
}

TEST(CheckRoutableTest, InitialTakesInstanceVersion) {
  BufferLedger l(Cfg(1, 1, 1));
  Version v = -1;
  EXPECT_TRUE(check_routable(Inst(0, 2), Fresh(1, 1), l, &v));
  EXPECT_EQ(v, 2);
}

TEST(CheckRoutableTest, PartialNeedsNewEnoughInstance) {
  BufferLedger l(Cfg(1, 1, 1));
  EXPECT_FALSE(check_routable(Inst(0, 2), Partial(1, 1, 3), l));
  EXPECT_TRUE(check_routable(Inst(0, 3), Partial(1, 1, 3), l));
}

TEST(CheckRoutableTest, InitialBlockedByFullLedger) {
  BufferLedger l(Cfg(0, 1, 1));
  l.reserve(9, 0, {90});
  EXPECT_FALSE(check_routable(Inst(0, 0), Fresh(1, 1), l));
  EXPECT_TRUE(check_routable(Inst(0, 1), Fresh(1, 1), l));
}

TEST(MlqOrderTest, StalestFirstInitialLast) {
  auto order = mlq_order({Fresh(1, 1), Partial(2, 2, 1), Partial(3, 3, 0),
                          Partial(4, 4, 0)});
  std::vector<TrajId> ids;
  for (const auto& t : order) ids.push_back(t.id);
  EXPECT_EQ(ids, (std::vector<TrajId>{3, 4, 2, 1}));
}

TEST(RoutingStrategyTest, PrefersIdleOverQueuedInstance) {
  BufferLedger l(Cfg(1, 4, 1));
  Snapshot s{Inst(0, 0, 4, 3), Inst(1, 0)};
  auto r = routing_strategy(s, View({Fresh(1, 1)}), {}, kCost, l);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].inst, 1);
  EXPECT_EQ(r[0].assigned, 0);
}

TEST(RoutingStrategyTest, WithholdsBelowThreshold) {
  BufferLedger l(Cfg(1, 4, 1));
  Snapshot s{Inst(0, 0, 4, 3), Inst(1, 0, 4, 1, 2000)};
  EXPECT_TRUE(routing_strategy(s, View({Fresh(1, 1)}), {}, kCost, l).empty());
}

TEST(RoutingStrategyTest, StopsAtFirstUnroutableQueue) {
  BufferLedger l(Cfg(1, 4, 1));
  // The partial trajectory needs version 5; nobody has it, so the fresh one
  // behind it in the MLQ is never examined.
  Snapshot s{Inst(0, 0)};
  auto r = routing_strategy(s, View({Partial(1, 1, 5), Fresh(2, 2)}), {},
                            kCost, l);
  EXPECT_TRUE(r.empty());
}

TEST(RoutingStrategyTest, WaterfallPrefersStalerInstanceGroup) {
  BufferLedger l(Cfg(2, 4, 1));
  // Both idle; the version-0 group is examined first.
  Snapshot s{Inst(0, 1), Inst(1, 0)};
  auto r = routing_strategy(s, View({Fresh(1, 1)}), {}, kCost, l);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].inst, 1);
}

TEST(SynchronizationTest, UpToDateNeverSelected) {
  BufferLedger l(Cfg(1, 4, 1));
  Snapshot s{Inst(0, 3)};
  EXPECT_TRUE(synchronization_strategy(s, View({Fresh(1, 1)}), 3, {}, kCost, l)
                  .empty());
}

TEST(SynchronizationTest, RoutableStaleInstanceKept) {
  BufferLedger l(Cfg(1, 4, 1));
  Snapshot s{Inst(0, 2)};
  EXPECT_TRUE(
      synchronization_strategy(s, View({Partial(1, 1, 2)}), 3, {}, kCost, l)
          .empty());
}

TEST(SynchronizationTest, UpdateThatUnlocksRouteIsSelected) {
  BufferLedger l(Cfg(1, 4, 1));
  Snapshot s{Inst(0, 2)};
  EXPECT_EQ(
      synchronization_strategy(s, View({Partial(1, 1, 3)}), 3, {}, kCost, l),
      std::vector<InstanceId>{0});
}

TEST(MigrationTest, ExcessWaitingSelected) {
  Snapshot s{Inst(0, 0, 2, 5)};
  auto m = migration_strategy(s, {}, kCost);
  ASSERT_EQ(m.size(), 1u);
  // Most recently queued first.
  EXPECT_EQ(m[0].second, (std::vector<TrajId>{1006, 1005}));
}

TEST(MigrationTest, ThroughputRatioDrainsBusiestInstance) {
  InstanceSnapshot busy = Inst(0, 0);
  for (int i = 0; i < 100; ++i) busy.run.push_back(100 + i);
  busy.kv_cache = 50000;  // ~3726 tokens/s
  InstanceSnapshot slow = Inst(1, 0, 1, 0, 5000);  // ~80 tokens/s
  auto m = migration_strategy({busy, slow}, {}, kCost);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].first, 0);
  EXPECT_EQ(m[0].second.size(), 100u);
}

TEST(MigrationTest, EmptyInstanceDisablesRatioTrigger) {
  InstanceSnapshot busy = Inst(0, 0, 100, 0);
  EXPECT_TRUE(migration_strategy({busy, Inst(1, 0)}, {}, kCost).empty());
}

TEST(VanillaTest, LeastLoadedAndImmediateSync) {
  BufferLedger l(Cfg(1, 4, 1));
  Snapshot s{Inst(0, 0, 3, 0), Inst(1, 0, 5, 0, 2000)};
  auto r = vanilla_routing(s, View({Fresh(1, 1)}), l);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].inst, 0);
  EXPECT_EQ(vanilla_synchronization({Inst(0, 1), Inst(1, 2)}, 2),
            std::vector<InstanceId>{0});
  EXPECT_TRUE(vanilla_migration(s).empty());
}

TEST(CoordinateTest, FreshSystemOnlyRoutes) {
  BufferLedger l(Cfg(1, 4, 1));
  Snapshot s{Inst(0, 0), Inst(1, 0)};
  TsView ts = View({Fresh(1, 1), Fresh(2, 2), Fresh(3, 3)});
  auto plan = coordinate(s, ts, 0, {}, SuiteFlags{}, kCost, l);
  ASSERT_FALSE(plan.commands.empty());
  int routed = 0;
  for (const Command& c : plan.commands) {
    EXPECT_EQ(c.kind, CommandKind::kRoute);
    routed += static_cast<int>(c.trajs.size());
  }
  EXPECT_EQ(routed, 3);
  EXPECT_EQ(plan.assignments.size(), 3u);
}

TEST(CoordinateTest, StarvedStaleInstanceInterruptsThenPulls) {
  BufferLedger l(Cfg(1, 4, 1));
  l.admit(1, 11, 0, {11});
  l.admit(2, 12, 0, {12});
  InstanceSnapshot stale = Inst(0, 0);
  stale.run = {11};
  stale.kv_cache = 300;
  TsView ts = View({Partial(21, 5, 1)});
  ts.remote[11] = Partial(11, 1, 0);
  auto plan = coordinate({stale, Inst(1, 1, 1, 1, 12)}, ts, 1, {},
                         SuiteFlags{}, kCost, l);
  ASSERT_GE(plan.commands.size(), 3u);
  EXPECT_EQ(plan.commands[0], (Command{CommandKind::kInterrupt, 0, {11}}));
  EXPECT_EQ(plan.commands[1], (Command{CommandKind::kPull, 0, {}}));
  std::vector<TrajId> routed;
  for (size_t i = 2; i < plan.commands.size(); ++i) {
    EXPECT_EQ(plan.commands[i].kind, CommandKind::kRoute);
    routed.insert(routed.end(), plan.commands[i].trajs.begin(),
                  plan.commands[i].trajs.end());
  }
  std::sort(routed.begin(), routed.end());
  EXPECT_EQ(routed, (std::vector<TrajId>{11, 21}));
}

TEST(CoordinateTest, NothingAssignableMeansNoCommands) {
  BufferLedger l(Cfg(0, 1, 1));
  l.reserve(9, 0, {90});
  auto plan = coordinate({Inst(0, 0)}, View({Fresh(1, 1)}), 0, {},
                         SuiteFlags{}, kCost, l);
  EXPECT_TRUE(plan.commands.empty());
}

TEST(CoordinatorTest, TracksSpeculativeState) {
  Coordinator c({0, 1}, {}, SuiteFlags{}, kCost);
  EXPECT_TRUE(c.accept({Inst(0, 0), Inst(1, 0)}));
  c.record({CommandKind::kRoute, 1, {5}}, 0);
  EXPECT_FALSE(c.accept({Inst(0, 0), Inst(1, 0)}));
  EXPECT_TRUE(c.accept({Inst(0, 0), Inst(1, 0, 1, 0)}));
}

}  // namespace
}  // namespace stalesim
