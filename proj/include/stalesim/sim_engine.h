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
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "stalesim/config.h"
#include "stalesim/coordinator.h"
#include "stalesim/parameter_server.h"
#include "stalesim/staleness_manager.h"
#include "stalesim/trajectory_server.h"

namespace stalesim {

struct StepRecord {
  int step = 0;
  Version v_buf = 0;
  double consume_time = 0.0;
  double done_time = 0.0;
  // Time since the previous consume (or since start for step 0).
  double step_time = 0.0;
  int64_t trajectories = 0;
  int64_t max_len = 0;
  double mean_len = 0.0;
  // Staleness (V_buf - V_traj) -> trajectory count.
  std::map<int64_t, int64_t> staleness;
};

struct TimeBreakdown {
  double decode = 0.0;
  double prefill = 0.0;
  double pull = 0.0;
  double commands = 0.0;
};

struct RunSummary {
  std::string suite;
  uint64_t seed = 0;
  int64_t total_tokens = 0;
  double sim_duration = 0.0;
  double throughput = 0.0;
  std::vector<StepRecord> steps;
  std::map<int64_t, int64_t> staleness;
  int64_t snapshots_accepted = 0;
  int64_t snapshots_rejected = 0;
  std::map<std::string, int64_t> commands;
  int64_t preemptions = 0;
  int64_t aborted = 0;
  int64_t consumed = 0;
  int64_t ingested_groups = 0;
  // Summed over instances.
  TimeBreakdown busy;

  std::string to_json() const;
};

struct RunResult {
  RunSummary summary;
  // One JSON record per line, in event order.
  std::vector<std::string> trace;
  std::string ledger_dump;
};

// Discrete-event model of the rollout cluster driven by the coordinator.
// Deterministic for a fixed (config, seed).
class Simulator {
 public:
  Simulator(const ExperimentConfig& cfg, uint64_t seed);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  // Processes one event. Returns false once the run is over.
  bool step();
  RunResult run();

  bool finished() const;
  double now() const;
  Snapshot collect_snapshot() const;
  RunSummary summary() const;
  const std::vector<std::string>& trace() const;
  const BufferLedger& ledger() const;
  const TrajectoryServer& trajectory_server() const;
  const ParameterServer& parameter_server() const;
  const Coordinator& coordinator() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunResult run_simulation(const ExperimentConfig& cfg, uint64_t seed);

}  // namespace stalesim
