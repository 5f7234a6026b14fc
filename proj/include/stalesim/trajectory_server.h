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
#include <random>
#include <set>
#include <string_view>
#include <vector>

#include "stalesim/common.h"

namespace stalesim {

enum class Lifecycle : uint8_t {
  kInServer,
  kRouted,
  kRunning,
  kWaiting,
  kRewarding,
  kCompleted,
  kAborted,
};

std::string_view to_string(Lifecycle l);

struct Trajectory {
  TrajId id = 0;
  GroupKey group = 0;
  int64_t prompt_len = 0;
  int64_t generated_len = 0;
  // Ground truth response length; strategies never read it.
  int64_t target_len = 0;
  std::optional<Version> v_traj;
  Lifecycle lifecycle = Lifecycle::kInServer;

  int64_t total_len() const { return prompt_len + generated_len; }
};

struct LengthDistribution {
  double median = 1024.0;
  double sigma = 1.0;
  int64_t max_response_len = 8192;
  int64_t prompt_len = 256;
  // Correlation of log-lengths inside one group (shared prompt difficulty).
  double group_correlation = 0.7;

  int64_t clamp(double len) const;

  friend bool operator==(const LengthDistribution&,
                         const LengthDistribution&) = default;
};

struct MlqQueue {
  std::optional<Version> version;
  std::vector<TrajId> ids;
};

// Holds trajectories waiting for rollout: fresh groups sampled from an
// endless seeded prompt stream and partial trajectories returned by
// interrupts. Also keeps the record of every trajectory ever ingested.
class TrajectoryServer {
 public:
  TrajectoryServer(int capacity_groups, int members_per_group,
                   const LengthDistribution& lengths, uint64_t seed);

  int capacity() const { return capacity_; }
  int held_groups() const { return held_; }

  // Samples fresh groups until the capacity is reached. Returns the count.
  int ingest();
  // Puts an interrupted trajectory back with its progress intact.
  void return_interrupted(TrajId id);
  // Hands a pooled trajectory to a rollout instance.
  void take(TrajId id);
  // Drops a pooled trajectory for good.
  void discard(TrajId id);
  // A group left the system (trained on or filtered); frees capacity.
  void retire_group(GroupKey key);

  // Queues by ascending V_traj, versionless last, ids ascending inside.
  std::vector<MlqQueue> mlq_view() const;
  const std::set<TrajId>& pool() const { return pool_; }
  bool in_pool(TrajId id) const { return pool_.contains(id); }

  const Trajectory& get(TrajId id) const;
  Trajectory& get(TrajId id);
  bool knows(TrajId id) const { return trajs_.contains(id); }
  const std::vector<TrajId>& members(GroupKey key) const;
  const std::map<TrajId, Trajectory>& all() const { return trajs_; }

 private:
  int capacity_;
  int members_per_group_;
  LengthDistribution lengths_;
  std::mt19937_64 rng_;
  int held_ = 0;
  TrajId next_traj_ = 1;
  GroupKey next_group_ = 1;
  std::map<TrajId, Trajectory> trajs_;
  std::map<GroupKey, std::vector<TrajId>> groups_;
  std::set<GroupKey> retired_;
  std::set<TrajId> pool_;
};

}  // namespace stalesim
