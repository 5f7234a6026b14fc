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

#include <optional>
#include <string>

#include "stalesim/coordinator.h"
#include "stalesim/cost_model.h"
#include "stalesim/parameter_server.h"
#include "stalesim/staleness_manager.h"
#include "stalesim/trajectory_server.h"

namespace stalesim {

struct Latencies {
  double pull = 1.0;
  double push = 2.0;
  double route = 0.05;
  double interrupt = 0.05;
  double reward = 1.0;
  double train = 2.0;
  // Extra training seconds per consumed response token.
  double train_per_token = 0.0;
  // Prefill seconds per token of prompt plus generated response.
  double k_prefill = 5e-5;

  friend bool operator==(const Latencies&, const Latencies&) = default;
};

struct ExperimentConfig {
  int eta = 3;
  int batch_size = 16;
  int group_size = 4;
  int num_instances = 4;
  double kv_budget = 65536.0;
  CostCoefficients coefficients;
  // When set, k1..k4 are fitted from this profile at load time.
  std::optional<std::string> coefficients_profile;
  StrategyConfig strategy;
  RedundancyLevel redundancy = RedundancyLevel::kNone;
  double redundancy_ratio = 0.0;
  LengthDistribution lengths;
  Latencies latencies;
  double snapshot_period = 1.0;
  int num_training_steps = 20;
  SuiteFlags suite;
  // Detailed mode: Push takes the makespan of the planned transfers.
  std::optional<CommPlanInput> ps_topology;
  // Simulated seconds without progress before the run is declared stuck.
  double stall_timeout = 600.0;
  bool trace_decode_ticks = false;

  void validate() const;
  LedgerConfig ledger() const;
  // Coefficients with M set to kv_budget.
  CostCoefficients cost() const;

  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
// Reads, parses, resolves a profile reference relative to the file, and
// validates.
ExperimentConfig load_config(const std::string& path);

}  // namespace stalesim
