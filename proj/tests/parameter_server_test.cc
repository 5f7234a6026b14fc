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

#include "stalesim/parameter_server.h"

#include <gtest/gtest.h>

namespace stalesim {
namespace {

TEST(ParameterServerTest, PushOnIdleServer) {
  ParameterServer ps;
  const uint64_t w = ps.push(1, 2.0);
  auto g = ps.start_ready(0.0);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].request, w);
  EXPECT_EQ(g[0].end, 2.0);
  EXPECT_EQ(ps.version(), 0);
  ps.complete(w);
  EXPECT_EQ(ps.version(), 1);
  EXPECT_TRUE(ps.idle());
}

TEST(ParameterServerTest, PushWaitsForActiveReaders) {
  ParameterServer ps;
  const uint64_t a = ps.pull(0, 1.0);
  const uint64_t b = ps.pull(1, 3.0);
  EXPECT_EQ(ps.start_ready(0.0).size(), 2u);
  EXPECT_EQ(ps.active_readers(), 2);
  const uint64_t w = ps.push(1, 2.0);
  EXPECT_TRUE(ps.start_ready(0.5).empty());
  ps.complete(a);
  EXPECT_TRUE(ps.start_ready(1.0).empty());
  ps.complete(b);
  auto g = ps.start_ready(3.0);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].request, w);
  EXPECT_EQ(g[0].start, 3.0);
}

TEST(ParameterServerTest, VersionSkip) {
  ParameterServer ps(1);
  try {
    ps.push(3, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionSkip);
  }
  ps.push(2, 1.0);
  EXPECT_EQ(ps.next_push_version(), 3);
}

TEST(ParameterServerTest, SharedPullsDeliverSameVersion) {
  ParameterServer ps(4);
  ps.pull(0, 1.0);
  ps.pull(1, 2.5);
  auto g = ps.start_ready(0.0);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].version, 4);
  EXPECT_EQ(g[1].version, 4);
  EXPECT_EQ(std::max(g[0].end, g[1].end), 2.5);
}

TEST(ParameterServerTest, PullBehindWriterGetsNewVersion) {
  ParameterServer ps;
  const uint64_t w = ps.push(1, 2.0);
  ps.start_ready(0.0);
  EXPECT_EQ(ps.version_for_new_reader(), 1);
  const uint64_t r = ps.pull(0, 1.0);
  EXPECT_TRUE(ps.start_ready(1.0).empty());
  ps.complete(w);
  auto g = ps.start_ready(2.0);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].request, r);
  EXPECT_EQ(g[0].version, 1);
  EXPECT_EQ(g[0].start, 2.0);
}

TEST(ParameterServerTest, QueuedWriterBlocksLaterReaders) {
  ParameterServer ps;
  const uint64_t a = ps.pull(0, 1.0);
  ps.start_ready(0.0);
  ps.push(1, 1.0);
  ps.pull(1, 1.0);
  EXPECT_TRUE(ps.start_ready(0.1).empty());
  ps.complete(a);
  auto g = ps.start_ready(1.0);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].op, PsOp::kPush);
}

CommPlanInput TwoSenders(const std::vector<double>& sizes) {
  CommPlanInput in;
  for (size_t i = 0; i < sizes.size(); ++i) {
    in.slices.push_back({static_cast<int>(i), sizes[i], {100}});
  }
  std::set<int> all;
  for (size_t i = 0; i < sizes.size(); ++i) all.insert(static_cast<int>(i));
  in.senders.push_back({0, all, 1.0, {}, 0.0});
  in.senders.push_back({1, all, 1.0, {}, 0.0});
  return in;
}

TEST(CommPlanTest, EqualSlicesSplitEvenly) {
  const CommPlan p = plan_communication(TwoSenders({1, 1, 1, 1}));
  EXPECT_EQ(p.load.at(0), 2.0);
  EXPECT_EQ(p.load.at(1), 2.0);
  EXPECT_EQ(p.assignments[0].sender, 0);
  EXPECT_EQ(p.assignments[1].sender, 1);
}

TEST(CommPlanTest, HandExampleBalancesFiveFive) {
  const CommPlan p = plan_communication(TwoSenders({4, 3, 2, 1}));
  EXPECT_EQ(p.load.at(0), 5.0);
  EXPECT_EQ(p.load.at(1), 5.0);
  std::vector<int> senders;
  for (const auto& a : p.assignments) senders.push_back(a.sender);
  EXPECT_EQ(senders, (std::vector<int>{0, 1, 1, 0}));
  EXPECT_EQ(p.makespan(), 5.0);
}

TEST(CommPlanTest, SingleSenderTakesAll) {
  CommPlanInput in = TwoSenders({1, 2, 3});
  in.senders.pop_back();
  const CommPlan p = plan_communication(in);
  for (const auto& a : p.assignments) EXPECT_EQ(a.sender, 0);
}

TEST(CommPlanTest, UncoverableSlice) {
  CommPlanInput in = TwoSenders({1, 2});
  for (auto& s : in.senders) s.holds = {0};
  try {
    plan_communication(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUncoverable);
  }
}

TEST(CommPlanTest, PerReceiverBandwidthAndLatency) {
  CommPlanInput in;
  in.slices.push_back({0, 8.0, {1, 2}});
  in.senders.push_back({0, {0}, 2.0, {{2, 8.0}}, 0.5});
  const CommPlan p = plan_communication(in);
  ASSERT_EQ(p.assignments.size(), 2u);
  EXPECT_DOUBLE_EQ(p.load.at(0), (0.5 + 4.0) + (0.5 + 1.0));
}

}  // namespace
}  // namespace stalesim
