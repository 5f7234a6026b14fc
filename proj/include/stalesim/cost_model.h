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
#include <iosfwd>
#include <string>
#include <vector>

#include "stalesim/common.h"

namespace stalesim {

// Per-decoding-step latency law of a rollout instance. kv_cache and M are in
// tokens of cache; k5 is cache units per token.
struct CostCoefficients {
  double k1 = 7.28e-8;
  double k2 = 1.72e-3;
  double k3 = 1.25e-4;
  double k4 = 1.07e-2;
  double k5 = 1.0;
  double M = 65536.0;

  // Reference coefficients profiled on an H20 node.
  static CostCoefficients reference();
  void validate() const;
  // Running-trajectory count where the matmul cost turns compute bound.
  double crossover() const { return k2 / k3; }

  friend bool operator==(const CostCoefficients&,
                         const CostCoefficients&) = default;
};

// The parts of an instance snapshot the cost model reads.
struct InstanceLoad {
  double kv_cache = 0.0;
  int64_t n_running = 0;
  int64_t n_waiting = 0;
};

double decode_step_latency(const CostCoefficients& c, double kv_cache,
                           int64_t n);
// Tokens per second; 0 for an instance with nothing running.
double estimate_throughput(const CostCoefficients& c, const InstanceLoad& s);
// Throughput change from routing a trajectory of traj_len tokens (prompt plus
// generated so far) to the instance. Zero when it would have to wait.
double marginal_gain(const CostCoefficients& c, const InstanceLoad& s,
                     double traj_len);
// marginal_gain on an idle instance.
double ideal_gain(const CostCoefficients& c, double traj_len);

struct ProfileSample {
  double kv_cache = 0.0;
  int64_t n_running = 0;
  double latency = 0.0;
};

struct FitResult {
  CostCoefficients coefficients;
  double rss = 0.0;
  double max_rel_residual = 0.0;
  int iterations = 0;
  int memory_bound = 0;
  int compute_bound = 0;
};

// Least-squares fit of k1..k4. k5 and M are copied from `base`. Throws
// kInvalidInput for fewer than 4 samples and kDegenerate when the samples do
// not pin down all four coefficients.
FitResult fit_coefficients(const std::vector<ProfileSample>& samples,
                           const CostCoefficients& base = {});

// Synthetic profile over a grid of batch sizes and cache fills, with
// multiplicative gaussian noise of relative size `noise`.
std::vector<ProfileSample> generate_profile(const CostCoefficients& c,
                                            int count, double noise,
                                            uint64_t seed);

// One "kv_cache n_running latency" record per line, whitespace or comma
// separated; '#' starts a comment.
std::vector<ProfileSample> parse_profile(std::istream& in);
std::vector<ProfileSample> load_profile(const std::string& path);
void write_profile(std::ostream& out, const std::vector<ProfileSample>& s);

std::string coefficients_to_json(const CostCoefficients& c);
CostCoefficients coefficients_from_json(const std::string& text);

}  // namespace stalesim
