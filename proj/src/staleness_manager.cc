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

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stalesim {

std::string_view to_string(EntryState state) {
  switch (state) {
    case EntryState::kEmpty:
      return "Empty";
    case EntryState::kReserved:
      return "Reserved";
    case EntryState::kOccupied:
      return "Occupied";
  }
  return "?";
}

std::string_view to_string(BufferState state) {
  switch (state) {
    case BufferState::kWaiting:
      return "Waiting";
    case BufferState::kReady:
      return "Ready";
    case BufferState::kStuck:
      return "Stuck";
  }
  return "?";
}

std::string_view to_string(RedundancyLevel level) {
  switch (level) {
    case RedundancyLevel::kNone:
      return "none";
    case RedundancyLevel::kBatch:
      return "batch";
    case RedundancyLevel::kGroup:
      return "group";
  }
  return "?";
}

RedundancyLevel redundancy_from_string(std::string_view name) {
  if (name == "none") return RedundancyLevel::kNone;
  if (name == "batch") return RedundancyLevel::kBatch;
  if (name == "group") return RedundancyLevel::kGroup;
  throw Error(ErrorCode::kConfigInvalid,
              "redundancy.level must be none, batch or group, got '" +
                  std::string(name) + "'");
}

namespace {

int enlarged(int base, double ratio) {
  // 1e-9 absorbs representation error so 128 * (1 + 1/16) stays 136.
  return static_cast<int>(std::ceil(base * (1.0 + ratio) - 1e-9));
}

}  // namespace

int LedgerConfig::buffer_capacity() const {
  return redundancy == RedundancyLevel::kBatch
             ? enlarged(batch_size, redundant_ratio)
             : batch_size;
}

int LedgerConfig::members_per_group() const {
  return redundancy == RedundancyLevel::kGroup
             ? enlarged(group_size, redundant_ratio)
             : group_size;
}

void LedgerConfig::validate() const {
  if (eta < 0) throw Error(ErrorCode::kConfigInvalid, "eta must be >= 0");
  if (batch_size <= 0) {
    throw Error(ErrorCode::kConfigInvalid, "batch_size must be positive");
  }
  if (group_size <= 0) {
    throw Error(ErrorCode::kConfigInvalid, "group_size must be positive");
  }
  if (redundant_ratio < 0.0) {
    throw Error(ErrorCode::kConfigInvalid,
                "redundancy.ratio must be non-negative");
  }
}

BufferLedger::BufferLedger(const LedgerConfig& config) : config_(config) {
  config_.validate();
}

StalenessBuffer& BufferLedger::materialize(Version v_buf) {
  auto it = buffers_.find(v_buf);
  if (it == buffers_.end()) {
    StalenessBuffer buffer;
    buffer.v_buf = v_buf;
    buffer.slots.resize(config_.buffer_capacity());
    it = buffers_.emplace(v_buf, std::move(buffer)).first;
  }
  return it->second;
}

BufferEntry& BufferLedger::at(const SlotRef& ref) {
  return buffers_.at(ref.buffer).slots.at(ref.slot);
}

const BufferEntry& BufferLedger::at(const SlotRef& ref) const {
  return buffers_.at(ref.buffer).slots.at(ref.slot);
}

bool BufferLedger::is_ready(const StalenessBuffer& buffer) const {
  const auto occupied = std::count_if(
      buffer.slots.begin(), buffer.slots.end(), [](const BufferEntry& e) {
        return e.state == EntryState::kOccupied;
      });
  if (config_.redundancy == RedundancyLevel::kBatch) {
    return occupied >= config_.batch_size;
  }
  return occupied == static_cast<long>(buffer.slots.size());
}

std::optional<int> BufferLedger::open_slot(Version v_buf, bool highest) const {
  auto it = buffers_.find(v_buf);
  if (it == buffers_.end()) {
    return highest ? config_.buffer_capacity() - 1 : 0;
  }
  const StalenessBuffer& buffer = it->second;
  if (is_ready(buffer)) return std::nullopt;
  const int n = static_cast<int>(buffer.slots.size());
  for (int i = 0; i < n; ++i) {
    const int slot = highest ? n - 1 - i : i;
    if (buffer.slots[slot].state == EntryState::kEmpty) return slot;
  }
  return std::nullopt;
}

bool BufferLedger::verify_assignable(Version v) const {
  const Version lo = std::max(v, consumed_upto_);
  for (Version b = v + config_.eta; b >= lo; --b) {
    if (open_slot(b, /*highest=*/true)) return true;
  }
  return false;
}

bool BufferLedger::verify_member_assignable(GroupKey key, Version v) const {
  auto it = index_.find(key);
  if (it == index_.end()) return false;
  const BufferEntry& e = at(it->second);
  if (e.state != EntryState::kReserved) return false;
  return std::min(e.version, v) + config_.eta >= it->second.buffer;
}

std::optional<GroupKey> BufferLedger::group_of(TrajId traj) const {
  auto it = member_index_.find(traj);
  if (it == member_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<SlotRef> BufferLedger::locate(GroupKey key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const BufferEntry* BufferLedger::entry(GroupKey key) const {
  auto it = index_.find(key);
  return it == index_.end() ? nullptr : &at(it->second);
}

void BufferLedger::place(const SlotRef& ref, BufferEntry entry) {
  BufferEntry& slot = materialize(ref.buffer).slots.at(ref.slot);
  if (slot.state != EntryState::kEmpty) {
    throw std::logic_error("ledger: placing into a non-empty slot");
  }
  index_[entry.key] = ref;
  slot = std::move(entry);
}

BufferEntry BufferLedger::take(const SlotRef& ref) {
  BufferEntry& slot = at(ref);
  BufferEntry out = std::move(slot);
  slot = BufferEntry{};
  index_.erase(out.key);
  return out;
}

void BufferLedger::forget_members(const BufferEntry& entry) {
  for (const Member& m : entry.members) member_index_.erase(m.id);
}

void BufferLedger::recompute_version(BufferEntry& entry) const {
  std::optional<Version> lowest;
  for (const Member& m : entry.members) {
    if (m.version && (!lowest || *m.version < *lowest)) lowest = m.version;
  }
  if (lowest) entry.version = *lowest;
}

Version BufferLedger::reserve(GroupKey key, Version v,
                              const std::vector<TrajId>& members) {
  if (index_.contains(key)) {
    throw Error(ErrorCode::kDuplicateKey,
                "group " + std::to_string(key) + " is already tracked");
  }
  if (members.empty()) {
    throw Error(ErrorCode::kInvalidInput, "a group needs at least one member");
  }
  for (TrajId id : members) {
    if (member_index_.contains(id)) {
      throw Error(ErrorCode::kDuplicateKey,
                  "trajectory " + std::to_string(id) + " is already tracked");
    }
  }
  const Version lo = std::max(v, consumed_upto_);
  for (Version b = v + config_.eta; b >= lo; --b) {
    const auto slot = open_slot(b, /*highest=*/true);
    if (!slot) continue;
    BufferEntry e;
    e.state = EntryState::kReserved;
    e.key = key;
    e.version = v;
    e.members.reserve(members.size());
    for (TrajId id : members) {
      e.members.push_back(Member{id, std::nullopt, false});
      member_index_[id] = key;
    }
    place(SlotRef{b, *slot}, std::move(e));
    return b;
  }
  throw Error(ErrorCode::kNoCapacity,
              "no empty slot in buffers [" + std::to_string(lo) + ", " +
                  std::to_string(v + config_.eta) + "]");
}

void BufferLedger::assign_member_version(TrajId traj, Version v) {
  auto mit = member_index_.find(traj);
  if (mit == member_index_.end()) {
    throw Error(ErrorCode::kUnknownTrajectory, std::to_string(traj));
  }
  const SlotRef ref = index_.at(mit->second);
  BufferEntry& e = at(ref);
  if (e.state != EntryState::kReserved) {
    throw Error(ErrorCode::kNotReserved,
                "group " + std::to_string(e.key) + " is not reserved");
  }
  auto member = std::find_if(e.members.begin(), e.members.end(),
                             [&](const Member& m) { return m.id == traj; });
  if (member->version) {
    throw Error(ErrorCode::kInvalidVersion,
                "trajectory " + std::to_string(traj) + " already has V_traj");
  }
  const Version lowest = std::min(e.version, v);
  if (lowest + config_.eta < ref.buffer) {
    throw Error(ErrorCode::kInvalidVersion,
                "version " + std::to_string(v) + " breaks the bound in buffer " +
                    std::to_string(ref.buffer));
  }
  member->version = v;
  e.version = lowest;
}

Version BufferLedger::admit(GroupKey key, TrajId traj, Version v,
                            const std::vector<TrajId>& members) {
  if (!index_.contains(key)) reserve(key, v, members);
  assign_member_version(traj, v);
  return index_.at(key).buffer;
}

void BufferLedger::fill_hole_with_reserved(SlotRef hole) {
  while (true) {
    if (is_ready(buffers_.at(hole.buffer))) return;
    std::optional<SlotRef> found;
    for (auto it = buffers_.lower_bound(consumed_upto_);
         it != buffers_.end() && it->first < hole.buffer && !found; ++it) {
      const auto& slots = it->second.slots;
      for (int s = 0; s < static_cast<int>(slots.size()); ++s) {
        const BufferEntry& e = slots[s];
        if (e.state == EntryState::kReserved &&
            e.version + config_.eta >= hole.buffer) {
          found = SlotRef{it->first, s};
          break;
        }
      }
    }
    if (!found) return;
    place(hole, take(*found));
    hole = *found;
  }
}

void BufferLedger::fill_hole_with_occupied(SlotRef hole) {
  while (true) {
    std::optional<SlotRef> found;
    for (auto it = buffers_.upper_bound(hole.buffer);
         it != buffers_.end() && !found; ++it) {
      const auto& slots = it->second.slots;
      for (int s = 0; s < static_cast<int>(slots.size()); ++s) {
        const BufferEntry& e = slots[s];
        if (e.state == EntryState::kOccupied && e.version <= hole.buffer &&
            e.version + config_.eta >= hole.buffer) {
          found = SlotRef{it->first, s};
          break;
        }
      }
    }
    if (!found) return;
    place(hole, take(*found));
    hole = *found;
  }
}

Version BufferLedger::occupy(BufferEntry entry) {
  entry.state = EntryState::kOccupied;
  const Version lo = std::max(consumed_upto_, entry.version);
  const Version hi = entry.version + config_.eta;
  // Prefer buffers that still need data; a Ready buffer only takes the entry
  // when nothing else inside the bound has room.
  for (Version b = lo; b <= hi; ++b) {
    if (const auto slot = open_slot(b, /*highest=*/false)) {
      place(SlotRef{b, *slot}, std::move(entry));
      return b;
    }
  }
  for (Version b = lo; b <= hi; ++b) {
    auto it = buffers_.find(b);
    if (it == buffers_.end()) continue;
    auto& slots = it->second.slots;
    for (int s = 0; s < static_cast<int>(slots.size()); ++s) {
      if (slots[s].state == EntryState::kEmpty) {
        place(SlotRef{b, s}, std::move(entry));
        return b;
      }
    }
  }
  throw std::logic_error("ledger: no slot within the staleness bound for " +
                         std::to_string(entry.key));
}

std::optional<Occupancy> BufferLedger::mark_complete(TrajId traj) {
  auto mit = member_index_.find(traj);
  if (mit == member_index_.end()) {
    throw Error(ErrorCode::kUnknownTrajectory, std::to_string(traj));
  }
  const GroupKey key = mit->second;
  const SlotRef ref = index_.at(key);
  BufferEntry& e = at(ref);
  if (e.state != EntryState::kReserved) {
    throw Error(ErrorCode::kNotReserved,
                "group " + std::to_string(key) + " is already occupied");
  }
  auto member = std::find_if(e.members.begin(), e.members.end(),
                             [&](const Member& m) { return m.id == traj; });
  if (!member->version) {
    throw Error(ErrorCode::kInvalidVersion,
                "trajectory " + std::to_string(traj) +
                    " completed without a V_traj");
  }
  member->complete = true;

  const auto done = std::count_if(e.members.begin(), e.members.end(),
                                  [](const Member& m) { return m.complete; });
  const auto required = std::min<long>(config_.group_size,
                                       static_cast<long>(e.members.size()));
  if (done < required) return std::nullopt;

  Occupancy result;
  result.key = key;
  std::vector<Member> kept;
  for (Member& m : e.members) {
    if (m.complete) {
      kept.push_back(m);
    } else {
      result.aborted.push_back(m.id);
      member_index_.erase(m.id);
    }
  }
  e.members = std::move(kept);
  recompute_version(e);

  BufferEntry moved = take(ref);
  fill_hole_with_reserved(ref);
  result.buffer = occupy(std::move(moved));
  return result;
}

void BufferLedger::delete_and_relocate(GroupKey key) {
  auto it = index_.find(key);
  if (it == index_.end()) {
    throw Error(ErrorCode::kUnknownKey, std::to_string(key));
  }
  const SlotRef ref = it->second;
  if (at(ref).state != EntryState::kReserved) {
    throw Error(ErrorCode::kNotReserved,
                "group " + std::to_string(key) + " is not reserved");
  }
  forget_members(take(ref));
  fill_hole_with_reserved(ref);
}

ConsumedBatch BufferLedger::consume() {
  auto it = buffers_.find(consumed_upto_);
  if (it == buffers_.end() || !is_ready(it->second)) {
    throw Error(ErrorCode::kNotReady,
                "buffer " + std::to_string(consumed_upto_) + " is " +
                    std::string(to_string(state_of(consumed_upto_))));
  }
  ConsumedBatch batch;
  batch.v_buf = consumed_upto_;
  for (BufferEntry& e : it->second.slots) {
    if (e.state == EntryState::kEmpty) continue;
    forget_members(e);
    index_.erase(e.key);
    if (e.state == EntryState::kOccupied &&
        static_cast<int>(batch.entries.size()) < config_.batch_size) {
      batch.entries.push_back(std::move(e));
      continue;
    }
    batch.aborted_groups.push_back(e.key);
    for (const Member& m : e.members) {
      if (!m.complete) batch.aborted_trajs.push_back(m.id);
    }
  }
  buffers_.erase(it);
  ++consumed_upto_;
  return batch;
}

std::vector<TrajId> BufferLedger::abort(GroupKey key) {
  auto it = index_.find(key);
  if (it == index_.end()) {
    throw Error(ErrorCode::kUnknownKey, std::to_string(key));
  }
  const SlotRef ref = it->second;
  BufferEntry e = take(ref);
  forget_members(e);
  std::vector<TrajId> in_flight;
  for (const Member& m : e.members) {
    if (!m.complete) in_flight.push_back(m.id);
  }
  if (e.state == EntryState::kReserved) {
    fill_hole_with_reserved(ref);
  } else {
    fill_hole_with_occupied(ref);
  }
  return in_flight;
}

BufferState BufferLedger::state_of(Version v_buf) const {
  if (v_buf < consumed_upto_) {
    throw Error(ErrorCode::kUnknownBuffer,
                "buffer " + std::to_string(v_buf) + " was already consumed");
  }
  auto it = buffers_.find(v_buf);
  if (it == buffers_.end()) return BufferState::kWaiting;
  const StalenessBuffer& buffer = it->second;
  if (is_ready(buffer)) return BufferState::kReady;
  const bool has_empty =
      std::any_of(buffer.slots.begin(), buffer.slots.end(),
                  [](const BufferEntry& e) {
                    return e.state == EntryState::kEmpty;
                  });
  return has_empty ? BufferState::kWaiting : BufferState::kStuck;
}

std::string BufferLedger::dump() const {
  std::ostringstream out;
  out << "ledger eta=" << config_.eta << " batch=" << config_.batch_size
      << " group=" << config_.group_size
      << " capacity=" << config_.buffer_capacity()
      << " consumed_upto=" << consumed_upto_ << "\n";
  for (const auto& [v_buf, buffer] : buffers_) {
    out << "buffer " << v_buf << " " << to_string(state_of(v_buf)) << " [";
    for (size_t s = 0; s < buffer.slots.size(); ++s) {
      const BufferEntry& e = buffer.slots[s];
      if (s) out << ", ";
      if (e.state == EntryState::kEmpty) {
        out << "-";
        continue;
      }
      out << "(" << e.key << "," << e.version << ","
          << to_string(e.state) << ")";
    }
    out << "]\n";
  }
  return out.str();
}

}  // namespace stalesim
