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
#include <string>
#include <vector>

#include "stalesim/config.h"
#include "stalesim/coordinator.h"

namespace stalesim {

struct SuiteResult {
  SuiteFlags suite;
  // Per seed, in seed order.
  std::vector<double> throughput;
  double mean_throughput = 0.0;
  double mean_step_time = 0.0;
  // Relative to the all-vanilla row.
  double gain = 0.0;
  std::map<int64_t, int64_t> staleness;
};

struct ComparisonReport {
  std::vector<uint64_t> seeds;
  // All eight routing/sync/migration combinations, all-staleflow first and
  // all-vanilla last.
  std::vector<SuiteResult> rows;

  const SuiteResult& row(const SuiteFlags& suite) const;
  std::string table() const;
  std::string csv() const;
};

std::vector<SuiteFlags> all_suites();

// Runs every suite on every seed. Runs are independent and spread over
// `threads` workers (0 picks the hardware concurrency).
ComparisonReport compare_suites(const ExperimentConfig& cfg,
                                const std::vector<uint64_t>& seeds,
                                int threads = 0);

}  // namespace stalesim
