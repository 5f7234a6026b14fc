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

#include "stalesim/staleness_manager.h"

#include <gtest/gtest.h>

namespace stalesim {
namespace {

LedgerConfig Cfg(int eta, int batch, int group) {
  LedgerConfig c;
  c.eta = eta;
  c.batch_size = batch;
  c.group_size = group;
  return c;
}

// Reserves a single-member group and stamps its version.
Version Admit(BufferLedger& l, GroupKey key, Version v) {
  return l.admit(key, key * 10, v, {key * 10});
}

void Complete(BufferLedger& l, GroupKey key) { l.mark_complete(key * 10); }

TEST(LedgerConfigTest, RedundancyEnlargesTheRightDimension) {
  LedgerConfig c = Cfg(3, 128, 16);
  c.redundant_ratio = 1.0 / 16;
  c.redundancy = RedundancyLevel::kBatch;
  EXPECT_EQ(c.buffer_capacity(), 136);
  EXPECT_EQ(c.members_per_group(), 16);
  c.redundancy = RedundancyLevel::kGroup;
  EXPECT_EQ(c.buffer_capacity(), 128);
  EXPECT_EQ(c.members_per_group(), 17);
}

TEST(LedgerConfigTest, RejectsBadValues) {
  EXPECT_THROW(BufferLedger(Cfg(-1, 1, 1)), Error);
  EXPECT_THROW(BufferLedger(Cfg(1, 0, 1)), Error);
  EXPECT_THROW(redundancy_from_string("some"), Error);
}

TEST(VerifyAssignableTest, EmptyLedger) {
  BufferLedger l(Cfg(1, 1, 1));
  EXPECT_TRUE(l.verify_assignable(0));
}

TEST(VerifyAssignableTest, FullWindowIsUnassignable) {
  BufferLedger l(Cfg(1, 1, 1));
  EXPECT_EQ(Admit(l, 1, 0), 1);
  EXPECT_EQ(Admit(l, 2, 0), 0);
  EXPECT_FALSE(l.verify_assignable(0));
  // Buffer 2 is untouched, so version 1 still fits.
  EXPECT_TRUE(l.verify_assignable(1));
}

TEST(ReserveTest, BackwardScanPicksLatestBuffer) {
  BufferLedger l(Cfg(1, 1, 1));
  EXPECT_EQ(l.reserve(1, 0, {1}), 1);
}

TEST(ReserveTest, ZeroEtaCollapsesRange) {
  BufferLedger l(Cfg(0, 1, 1));
  EXPECT_EQ(l.reserve(1, 3, {1}), 3);
}

TEST(ReserveTest, FallsBackWhenLatestIsFull) {
  BufferLedger l(Cfg(2, 1, 1));
  EXPECT_EQ(l.reserve(1, 0, {1}), 2);
  EXPECT_EQ(l.reserve(2, 0, {2}), 1);
  EXPECT_EQ(l.reserve(3, 0, {3}), 0);
  EXPECT_THROW(l.reserve(4, 0, {4}), Error);
}

TEST(ReserveTest, DuplicateKeyAndMember) {
  BufferLedger l(Cfg(1, 2, 1));
  l.reserve(1, 0, {1});
  try {
    l.reserve(1, 0, {2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateKey);
  }
  EXPECT_THROW(l.reserve(2, 0, {1}), Error);
}

TEST(ReserveTest, MemberVersionMayNotBreakBound) {
  BufferLedger l(Cfg(1, 1, 2));
  EXPECT_EQ(l.reserve(1, 2, {1, 2}), 3);
  l.assign_member_version(1, 2);
  EXPECT_FALSE(l.verify_member_assignable(1, 1));
  try {
    l.assign_member_version(2, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidVersion);
  }
  EXPECT_TRUE(l.verify_member_assignable(1, 3));
}

TEST(MarkCompleteTest, OccupiesEarliestEmpty) {
  BufferLedger l(Cfg(1, 1, 1));
  EXPECT_EQ(Admit(l, 1, 0), 1);
  auto occ = l.mark_complete(10);
  ASSERT_TRUE(occ);
  EXPECT_EQ(occ->buffer, 0);
  EXPECT_EQ(l.state_of(0), BufferState::kReady);
  EXPECT_EQ(l.state_of(1), BufferState::kWaiting);
}

TEST(MarkCompleteTest, WaitsForWholeGroup) {
  BufferLedger l(Cfg(1, 1, 2));
  l.admit(1, 10, 0, {10, 11});
  l.assign_member_version(11, 0);
  EXPECT_FALSE(l.mark_complete(10));
  EXPECT_EQ(l.entry(1)->state, EntryState::kReserved);
  EXPECT_TRUE(l.mark_complete(11));
}

TEST(MarkCompleteTest, GroupRedundancyAbortsSurplus) {
  LedgerConfig c = Cfg(1, 1, 16);
  c.redundancy = RedundancyLevel::kGroup;
  c.redundant_ratio = 1.0 / 16;
  BufferLedger l(c);
  std::vector<TrajId> members;
  for (TrajId t = 1; t <= 17; ++t) members.push_back(t);
  l.reserve(5, 0, members);
  for (TrajId t = 1; t <= 17; ++t) l.assign_member_version(t, 0);
  for (TrajId t = 1; t < 16; ++t) EXPECT_FALSE(l.mark_complete(t));
  auto occ = l.mark_complete(16);
  ASSERT_TRUE(occ);
  EXPECT_EQ(occ->aborted, std::vector<TrajId>{17});
  EXPECT_EQ(l.entry(5)->members.size(), 16u);
  EXPECT_FALSE(l.tracks_trajectory(17));
}

TEST(MarkCompleteTest, VersionlessMemberIsRejected) {
  BufferLedger l(Cfg(1, 1, 1));
  l.reserve(1, 0, {10});
  try {
    l.mark_complete(10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidVersion);
  }
  EXPECT_THROW(l.mark_complete(99), Error);
}

TEST(DeleteAndRelocateTest, LoneEntryRemoved) {
  BufferLedger l(Cfg(1, 1, 1));
  l.reserve(1, 0, {1});
  l.delete_and_relocate(1);
  EXPECT_FALSE(l.tracks(1));
  EXPECT_TRUE(l.verify_assignable(0));
}

TEST(DeleteAndRelocateTest, EarlierReservationMovesForward) {
  BufferLedger l(Cfg(1, 1, 1));
  EXPECT_EQ(l.reserve(1, 0, {1}), 1);
  EXPECT_EQ(l.reserve(2, 0, {2}), 0);
  l.delete_and_relocate(1);
  EXPECT_EQ(l.locate(2)->buffer, 1);
  EXPECT_EQ(l.buffers().at(0).slots[0].state, EntryState::kEmpty);
}

TEST(DeleteAndRelocateTest, OutOfBoundReservationStays) {
  BufferLedger l(Cfg(1, 1, 1));
  EXPECT_EQ(l.reserve(1, 1, {1}), 2);
  EXPECT_EQ(l.reserve(2, 0, {2}), 1);
  // Version 0 + eta 1 < buffer 2.
  l.delete_and_relocate(1);
  EXPECT_EQ(l.locate(2)->buffer, 1);
}

TEST(ConsumeTest, ExactFitBatch) {
  BufferLedger l(Cfg(0, 4, 1));
  for (GroupKey k = 1; k <= 4; ++k) {
    Admit(l, k, 0);
    Complete(l, k);
  }
  ConsumedBatch b = l.consume();
  EXPECT_EQ(b.entries.size(), 4u);
  EXPECT_TRUE(b.aborted_groups.empty());
  EXPECT_EQ(l.consumed_upto(), 1);
  EXPECT_THROW(l.state_of(0), Error);
}

TEST(ConsumeTest, StuckBufferIsNotReady) {
  BufferLedger l(Cfg(0, 2, 1));
  Admit(l, 1, 0);
  Admit(l, 2, 0);
  Complete(l, 1);
  EXPECT_EQ(l.state_of(0), BufferState::kStuck);
  try {
    l.consume();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotReady);
  }
}

TEST(ConsumeTest, BatchRedundancyDropsSurplus) {
  LedgerConfig c = Cfg(0, 2, 1);
  c.redundancy = RedundancyLevel::kBatch;
  c.redundant_ratio = 0.5;
  BufferLedger l(c);
  ASSERT_EQ(c.buffer_capacity(), 3);
  for (GroupKey k = 1; k <= 3; ++k) Admit(l, k, 0);
  Complete(l, 1);
  EXPECT_EQ(l.state_of(0), BufferState::kStuck);
  Complete(l, 3);
  EXPECT_EQ(l.state_of(0), BufferState::kReady);
  ConsumedBatch b = l.consume();
  EXPECT_EQ(b.entries.size(), 2u);
  EXPECT_EQ(b.aborted_groups, std::vector<GroupKey>{2});
  EXPECT_EQ(b.aborted_trajs, std::vector<TrajId>{20});
}

TEST(AbortTest, OccupiedHoleFilledFromLaterBuffer) {
  BufferLedger l(Cfg(1, 1, 1));
  EXPECT_EQ(Admit(l, 1, 0), 1);
  EXPECT_EQ(Admit(l, 2, 0), 0);
  Complete(l, 2);  // stays in buffer 0
  Complete(l, 1);  // buffer 0 full, lands in 1
  EXPECT_EQ(l.locate(1)->buffer, 1);
  l.abort(2);
  EXPECT_EQ(l.locate(1)->buffer, 0);
}

TEST(AbortTest, ReservedReturnsRunningMembers) {
  BufferLedger l(Cfg(1, 1, 3));
  l.reserve(1, 0, {1, 2, 3});
  std::vector<TrajId> ids = l.abort(1);
  EXPECT_EQ(ids, (std::vector<TrajId>{1, 2, 3}));
  EXPECT_THROW(l.abort(1), Error);
}

TEST(AbortTest, LoneOccupiedEntry) {
  BufferLedger l(Cfg(0, 1, 1));
  Admit(l, 1, 0);
  Complete(l, 1);
  EXPECT_TRUE(l.abort(1).empty());
  EXPECT_EQ(l.buffers().at(0).slots[0].state, EntryState::kEmpty);
}

TEST(StateOfTest, ThreeStates) {
  BufferLedger l(Cfg(0, 2, 1));
  EXPECT_EQ(l.state_of(0), BufferState::kWaiting);
  Admit(l, 1, 0);
  Complete(l, 1);
  EXPECT_EQ(l.state_of(0), BufferState::kWaiting);
  Admit(l, 2, 0);
  EXPECT_EQ(l.state_of(0), BufferState::kStuck);
  Complete(l, 2);
  EXPECT_EQ(l.state_of(0), BufferState::kReady);
}

TEST(DumpTest, Format) {
  BufferLedger l(Cfg(1, 2, 1));
  l.reserve(7, 0, {1});
  EXPECT_EQ(l.dump(),
            "ledger eta=1 batch=2 group=1 capacity=2 consumed_upto=0\n"
            "buffer 1 Waiting [-, (7,0,Reserved)]\n");
}

}  // namespace
}  // namespace stalesim
