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

#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stalesim/common.h"

namespace stalesim {

enum class EntryState : uint8_t { kEmpty, kReserved, kOccupied };
enum class BufferState : uint8_t { kWaiting, kReady, kStuck };
enum class RedundancyLevel : uint8_t { kNone, kBatch, kGroup };

std::string_view to_string(EntryState state);
std::string_view to_string(BufferState state);
std::string_view to_string(RedundancyLevel level);
RedundancyLevel redundancy_from_string(std::string_view name);

struct LedgerConfig {
  int eta = 1;
  int batch_size = 1;
  int group_size = 1;
  RedundancyLevel redundancy = RedundancyLevel::kNone;
  double redundant_ratio = 0.0;

  // Slots per staleness buffer: batch_size, or the enlarged batch under
  // batch-level redundancy (128 at ratio 1/16 -> 136).
  int buffer_capacity() const;
  // Trajectories sampled per group: group_size, or the enlarged group under
  // group-level redundancy (16 at ratio 1/16 -> 17).
  int members_per_group() const;
  void validate() const;
};

struct Member {
  TrajId id = 0;
  std::optional<Version> version;
  bool complete = false;
};

struct BufferEntry {
  EntryState state = EntryState::kEmpty;
  GroupKey key = 0;
  // Minimum V_traj over the group's versioned members.
  Version version = 0;
  std::vector<Member> members;
};

struct StalenessBuffer {
  Version v_buf = 0;
  std::vector<BufferEntry> slots;
};

struct SlotRef {
  Version buffer = 0;
  int slot = 0;

  friend bool operator==(const SlotRef&, const SlotRef&) = default;
};

// Result of the completion that turns a reserved group into an occupied one.
struct Occupancy {
  GroupKey key = 0;
  Version buffer = 0;
  // Surplus members dropped under group-level redundancy; the caller owns
  // cancelling whichever of them are still running.
  std::vector<TrajId> aborted;
};

struct ConsumedBatch {
  Version v_buf = 0;
  // Exactly batch_size occupied entries, slot order.
  std::vector<BufferEntry> entries;
  std::vector<GroupKey> aborted_groups;
  // Members of aborted groups that had not completed.
  std::vector<TrajId> aborted_trajs;
};

// Versioned staleness buffers that gate which model version a trajectory
// group may be generated with. Every tracked entry e in buffer b satisfies
// e.version <= b <= e.version + eta.
//
// Reserve places a placeholder in the latest buffer the group could still
// be trained in; a completed group is moved into the earliest buffer with
// room. Single writer; const members are pure.
class BufferLedger {
 public:
  explicit BufferLedger(const LedgerConfig& config);

  const LedgerConfig& config() const { return config_; }
  Version consumed_upto() const { return consumed_upto_; }

  // True iff a reservation for version v would find an open slot.
  bool verify_assignable(Version v) const;
  // True iff member version v may join the already reserved group `key`
  // without breaking the bound for the buffer the group sits in.
  bool verify_member_assignable(GroupKey key, Version v) const;

  Version reserve(GroupKey key, Version v, const std::vector<TrajId>& members);
  // Records the V_traj of one member of a reserved group. The group version
  // becomes the minimum over its members.
  void assign_member_version(TrajId traj, Version v);
  // Routes one member: reserves the group on first use, otherwise records
  // the member's version. Returns the buffer the group sits in.
  Version admit(GroupKey key, TrajId traj, Version v,
                const std::vector<TrajId>& members);

  std::optional<Occupancy> mark_complete(TrajId traj);
  void delete_and_relocate(GroupKey key);
  ConsumedBatch consume();
  std::vector<TrajId> abort(GroupKey key);

  BufferState state_of(Version v_buf) const;

  bool tracks(GroupKey key) const { return index_.contains(key); }
  bool tracks_trajectory(TrajId traj) const {
    return member_index_.contains(traj);
  }
  std::optional<GroupKey> group_of(TrajId traj) const;
  std::optional<SlotRef> locate(GroupKey key) const;
  const BufferEntry* entry(GroupKey key) const;
  size_t tracked_groups() const { return index_.size(); }

  // Materialized buffers in index order. Buffers that were never targeted
  // are implicitly all-Empty.
  const std::map<Version, StalenessBuffer>& buffers() const {
    return buffers_;
  }

  // Canonical text rendering, one line per materialized buffer.
  std::string dump() const;

 private:
  StalenessBuffer& materialize(Version v_buf);
  BufferEntry& at(const SlotRef& ref);
  const BufferEntry& at(const SlotRef& ref) const;
  // Empty slot that a reservation or occupation may claim; buffers that are
  // already Ready are closed.
  std::optional<int> open_slot(Version v_buf, bool highest) const;
  bool is_ready(const StalenessBuffer& buffer) const;
  void place(const SlotRef& ref, BufferEntry entry);
  BufferEntry take(const SlotRef& ref);
  void fill_hole_with_reserved(SlotRef hole);
  void fill_hole_with_occupied(SlotRef hole);
  Version occupy(BufferEntry entry);
  void forget_members(const BufferEntry& entry);
  void recompute_version(BufferEntry& entry) const;

  LedgerConfig config_;
  Version consumed_upto_ = 0;
  std::map<Version, StalenessBuffer> buffers_;
  std::unordered_map<GroupKey, SlotRef> index_;
  std::unordered_map<TrajId, GroupKey> member_index_;
};

}  // namespace stalesim
