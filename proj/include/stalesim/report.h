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

namespace stalesim {

struct LoadSample {
  double t = 0.0;
  int inst = 0;
  int64_t run = 0;
  int64_t wait = 0;
  int64_t complete = 0;
  double kv = 0.0;
  int64_t version = 0;
};

struct StepLengths {
  int step = 0;
  int64_t v_buf = 0;
  int64_t trajectories = 0;
  int64_t max_len = 0;
  double mean_len = 0.0;
};

// Seconds spent per activity, summed over whoever performs it.
struct Breakdown {
  double duration = 0.0;
  double train = 0.0;
  double push = 0.0;
  double pull = 0.0;
  double commands = 0.0;
  double decode = 0.0;
};

struct TraceReport {
  // Accepted snapshots only.
  std::vector<LoadSample> loads;
  // v_buf -> staleness -> trajectories.
  std::map<int64_t, std::map<int64_t, int64_t>> staleness;
  std::vector<StepLengths> steps;
  Breakdown breakdown;

  int64_t max_staleness() const;
  std::string load_csv() const;
  // One row per buffer, columns for staleness 0..max_staleness().
  std::string staleness_csv() const;
  std::string lengths_csv() const;
  std::string breakdown_csv() const;
};

// Throws Error(kMalformedTrace) naming the first bad line.
TraceReport build_report(const std::vector<std::string>& lines);
TraceReport load_report(const std::string& trace_path);
// Writes loads.csv, staleness.csv, lengths.csv and breakdown.csv.
void write_report(const TraceReport& report, const std::string& dir);

}  // namespace stalesim
