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

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stalesim/common.h"

namespace stalesim {

enum class PsOp : uint8_t { kPush, kPull };

struct PsGrant {
  uint64_t request = 0;
  PsOp op = PsOp::kPull;
  InstanceId inst = -1;
  double start = 0.0;
  double end = 0.0;
  // Pull: version delivered. Push: version being written.
  Version version = 0;
};

// Versioned parameter store with a read-write lock over simulated time.
// Requests queue FIFO; consecutive readers at the head share the lock, and a
// queued writer holds back every reader behind it.
class ParameterServer {
 public:
  explicit ParameterServer(Version initial = 0) : version_(initial) {}

  Version version() const { return version_; }
  // Version a Pull submitted now will deliver.
  Version version_for_new_reader() const;
  // Next version a Push must carry.
  Version next_push_version() const { return version_ + writers_ahead() + 1; }

  // Throws kVersionSkip unless version == next_push_version().
  uint64_t push(Version version, double duration);
  uint64_t pull(InstanceId inst, double duration);

  // Grants every request the lock admits at time `now`. The caller completes
  // each grant at its end time.
  std::vector<PsGrant> start_ready(double now);
  void complete(uint64_t request);

  bool idle() const { return queue_.empty() && active_.empty(); }
  bool writing() const;
  int active_readers() const;
  // Every granted interval so far, in grant order.
  const std::vector<PsGrant>& history() const { return history_; }

 private:
  struct Request {
    uint64_t id = 0;
    PsOp op = PsOp::kPull;
    InstanceId inst = -1;
    double duration = 0.0;
    Version version = 0;
  };

  int writers_ahead() const;

  Version version_;
  uint64_t next_id_ = 1;
  std::deque<Request> queue_;
  std::map<uint64_t, PsGrant> active_;
  std::vector<PsGrant> history_;
};

struct SliceSpec {
  int id = 0;
  double size = 0.0;
  std::vector<int> receivers;

  friend bool operator==(const SliceSpec&, const SliceSpec&) = default;
};

struct SenderSpec {
  int id = 0;
  std::set<int> holds;
  // Bytes per second to a receiver; receivers not listed use `bandwidth`.
  double bandwidth = 1.0;
  std::map<int, double> bandwidth_to;
  double latency = 0.0;

  double bandwidth_for(int receiver) const;

  friend bool operator==(const SenderSpec&, const SenderSpec&) = default;
};

struct CommPlanInput {
  std::vector<SliceSpec> slices;
  std::vector<SenderSpec> senders;

  friend bool operator==(const CommPlanInput&,
                         const CommPlanInput&) = default;
};

struct CommAssignment {
  int slice = 0;
  int receiver = 0;
  int sender = 0;

  friend bool operator==(const CommAssignment&,
                         const CommAssignment&) = default;
};

struct CommPlan {
  std::vector<CommAssignment> assignments;
  // Accumulated latency estimate per sender id.
  std::map<int, double> load;

  double makespan() const;
  std::string dump() const;
};

// Greedy balancing: each (slice, receiver) requirement goes to the holder
// with the least accumulated latency so far, lowest id on ties.
CommPlan plan_communication(const CommPlanInput& input);

}  // namespace stalesim
