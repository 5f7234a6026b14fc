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


#include "stalesim/trajectory_server.h"

#include <algorithm>
#include <cmath>

namespace stalesim {

std::string_view to_string(Lifecycle l) {
  switch (l) {
    case Lifecycle::kInServer:
      return "InServer";
    case Lifecycle::kRouted:
      return "Routed";
    case Lifecycle::kRunning:
      return "Running";
    case Lifecycle::kWaiting:
      return "Waiting";
    case Lifecycle::kRewarding:
      return "Rewarding";
    case Lifecycle::kCompleted:
      return "Completed";
    case Lifecycle::kAborted:
      return "Aborted";
  }
  return "?";
}

int64_t LengthDistribution::clamp(double len) const {
  const double r = std::round(len);
  if (!(r >= 1.0)) return 1;
  if (r >= static_cast<double>(max_response_len)) return max_response_len;
  return static_cast<int64_t>(r);
}

TrajectoryServer::TrajectoryServer(int capacity_groups, int members_per_group,
                                   const LengthDistribution& lengths,
                                   uint64_t seed)
    : capacity_(capacity_groups),
      members_per_group_(members_per_group),
      lengths_(lengths),
      rng_(seed) {
  if (capacity_ <= 0 || members_per_group_ <= 0) {
    throw Error(ErrorCode::kConfigInvalid,
                "trajectory server capacity must be positive");
  }
}

int TrajectoryServer::ingest() {
  std::normal_distribution<double> z(0.0, 1.0);
  const double rho = lengths_.group_correlation;
  const double own = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  int admitted = 0;
  while (held_ < capacity_) {
    const GroupKey key = next_group_++;
    const double shared = z(rng_);
    auto& ids = groups_[key];
    for (int m = 0; m < members_per_group_; ++m) {
      Trajectory t;
      t.id = next_traj_++;
      t.group = key;
      t.prompt_len = lengths_.prompt_len;
      const double g = rho * shared + own * z(rng_);
      t.target_len = lengths_.clamp(lengths_.median *
                                    std::exp(lengths_.sigma * g));
      ids.push_back(t.id);
      pool_.insert(t.id);
      trajs_.emplace(t.id, t);
    }
    ++held_;
    ++admitted;
  }
  return admitted;
}

const Trajectory& TrajectoryServer::get(TrajId id) const {
  auto it = trajs_.find(id);
  if (it == trajs_.end()) {
    throw Error(ErrorCode::kUnknownTrajectory, std::to_string(id));
  }
  return it->second;
}

Trajectory& TrajectoryServer::get(TrajId id) {
  auto it = trajs_.find(id);
  if (it == trajs_.end()) {
    throw Error(ErrorCode::kUnknownTrajectory, std::to_string(id));
  }
  return it->second;
}

const std::vector<TrajId>& TrajectoryServer::members(GroupKey key) const {
  auto it = groups_.find(key);
  if (it == groups_.end()) {
    throw Error(ErrorCode::kUnknownKey, std::to_string(key));
  }
  return it->second;
}

void TrajectoryServer::return_interrupted(TrajId id) {
  Trajectory& t = get(id);
  if (t.lifecycle != Lifecycle::kRunning &&
      t.lifecycle != Lifecycle::kWaiting &&
      t.lifecycle != Lifecycle::kRouted) {
    throw Error(ErrorCode::kInvalidInput,
                "trajectory " + std::to_string(id) + " is " +
                    std::string(to_string(t.lifecycle)) +
                    " and cannot return to the server");
  }
  if (!t.v_traj) {
    throw Error(ErrorCode::kInvalidVersion,
                "interrupted trajectory " + std::to_string(id) +
                    " has no V_traj");
  }
  t.lifecycle = Lifecycle::kInServer;
  pool_.insert(id);
}

void TrajectoryServer::take(TrajId id) {
  Trajectory& t = get(id);
  if (!pool_.erase(id)) {
    throw Error(ErrorCode::kInvalidInput,
                "trajectory " + std::to_string(id) + " is not in the server");
  }
  t.lifecycle = Lifecycle::kRouted;
}

void TrajectoryServer::discard(TrajId id) {
  Trajectory& t = get(id);
  pool_.erase(id);
  t.lifecycle = Lifecycle::kAborted;
}

void TrajectoryServer::retire_group(GroupKey key) {
  if (!groups_.contains(key)) {
    throw Error(ErrorCode::kUnknownKey, std::to_string(key));
  }
  if (retired_.insert(key).second) --held_;
}

std::vector<MlqQueue> TrajectoryServer::mlq_view() const {
  std::map<Version, std::vector<TrajId>> versioned;
  std::vector<TrajId> initial;
  for (TrajId id : pool_) {
    const Trajectory& t = trajs_.at(id);
    if (t.v_traj) {
      versioned[*t.v_traj].push_back(id);
    } else {
      initial.push_back(id);
    }
  }
  std::vector<MlqQueue> out;
  for (auto& [v, ids] : versioned) out.push_back({v, std::move(ids)});
  if (!initial.empty()) out.push_back({std::nullopt, std::move(initial)});
  return out;
}

}  // namespace stalesim
