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


#include "stalesim/cost_model.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

namespace stalesim {

CostCoefficients CostCoefficients::reference() { return CostCoefficients{}; }

void CostCoefficients::validate() const {
  const double values[] = {k1, k2, k3, k4, k5, M};
  const char* names[] = {"k1", "k2", "k3", "k4", "k5", "M"};
  for (int i = 0; i < 6; ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw Error(ErrorCode::kConfigInvalid,
                  std::string(names[i]) + " must be positive");
    }
  }
}

double decode_step_latency(const CostCoefficients& c, double kv_cache,
                           int64_t n) {
  return c.k1 * kv_cache + std::max(c.k2, c.k3 * static_cast<double>(n)) +
         c.k4;
}

double estimate_throughput(const CostCoefficients& c, const InstanceLoad& s) {
  if (s.n_running <= 0) return 0.0;
  return static_cast<double>(s.n_running) /
         decode_step_latency(c, s.kv_cache, s.n_running);
}

double marginal_gain(const CostCoefficients& c, const InstanceLoad& s,
                     double traj_len) {
  const double kv = s.kv_cache + c.k5 * traj_len;
  if (kv > c.M || s.n_waiting > 0) return 0.0;
  InstanceLoad next = s;
  next.kv_cache = kv;
  next.n_running += 1;
  return estimate_throughput(c, next) - estimate_throughput(c, s);
}

double ideal_gain(const CostCoefficients& c, double traj_len) {
  return 1.0 / (c.k1 * c.k5 * traj_len + std::max(c.k2, c.k3) + c.k4);
}

namespace {

struct Solve {
  bool ok = false;
  Eigen::Vector4d k = Eigen::Vector4d::Zero();
  double rss = std::numeric_limits<double>::infinity();
};

// memory[i] selects the k2 column for sample i, otherwise the k3*n column.
Solve solve(const std::vector<ProfileSample>& samples,
            const std::vector<bool>& memory) {
  const int rows = static_cast<int>(samples.size());
  Eigen::MatrixXd a(rows, 4);
  Eigen::VectorXd y(rows);
  for (int i = 0; i < rows; ++i) {
    const ProfileSample& s = samples[i];
    a(i, 0) = s.kv_cache;
    a(i, 1) = memory[i] ? 1.0 : 0.0;
    a(i, 2) = memory[i] ? 0.0 : static_cast<double>(s.n_running);
    a(i, 3) = 1.0;
    y(i) = s.latency;
  }
  Eigen::Vector4d scale;
  for (int j = 0; j < 4; ++j) {
    const double m = a.col(j).cwiseAbs().maxCoeff();
    scale(j) = m > 0.0 ? m : 1.0;
    a.col(j) /= scale(j);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  Solve out;
  if (qr.rank() < 4) return out;
  const Eigen::VectorXd z = qr.solve(y);
  out.rss = (a * z - y).squaredNorm();
  out.k = z.cwiseQuotient(scale);
  out.ok = true;
  return out;
}

bool all_positive(const Eigen::Vector4d& k) { return (k.array() > 0.0).all(); }

// A term whose largest contribution vanishes next to the observed latency
// was not identified by the data, only absorbed by roundoff.
bool identified(const std::vector<ProfileSample>& samples,
                const Eigen::Vector4d& k) {
  double kv = 0.0, n = 0.0, lat = 0.0;
  for (const ProfileSample& s : samples) {
    kv = std::max(kv, s.kv_cache);
    n = std::max(n, static_cast<double>(s.n_running));
    lat = std::max(lat, s.latency);
  }
  const double floor = 1e-9 * lat;
  return k(0) * kv > floor && k(1) > floor && k(2) * n > floor &&
         k(3) > floor;
}

std::vector<bool> classify(const std::vector<ProfileSample>& samples,
                           const Eigen::Vector4d& k) {
  std::vector<bool> memory(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    memory[i] = k(2) * static_cast<double>(samples[i].n_running) <= k(1);
  }
  return memory;
}

}  // namespace

FitResult fit_coefficients(const std::vector<ProfileSample>& samples,
                           const CostCoefficients& base) {
  if (samples.size() < 4) {
    throw Error(ErrorCode::kInvalidInput,
                "fitting needs at least 4 samples, got " +
                    std::to_string(samples.size()));
  }
  for (const ProfileSample& s : samples) {
    if (!(s.latency > 0.0) || s.kv_cache < 0.0 || s.n_running < 0) {
      throw Error(ErrorCode::kInvalidInput, "sample out of range");
    }
  }
  std::vector<int64_t> ns;
  for (const ProfileSample& s : samples) ns.push_back(s.n_running);
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

  // Seed the regime split with the best threshold on n, then iterate
  // classify/refit until the split is stable.
  Solve best;
  std::vector<bool> memory;
  bool best_positive = false;
  for (size_t cut = 0; cut + 1 < ns.size(); ++cut) {
    std::vector<bool> split(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
      split[i] = samples[i].n_running <= ns[cut];
    }
    const Solve s = solve(samples, split);
    if (!s.ok) continue;
    const bool positive = all_positive(s.k);
    if ((positive && !best_positive) ||
        (positive == best_positive && s.rss < best.rss)) {
      best = s;
      memory = split;
      best_positive = positive;
    }
  }
  if (!best.ok) {
    throw Error(ErrorCode::kDegenerate,
                "samples do not cover both latency regimes");
  }

  int iterations = 0;
  while (iterations < 50 && all_positive(best.k)) {
    ++iterations;
    const std::vector<bool> next = classify(samples, best.k);
    if (next == memory) break;
    const Solve s = solve(samples, next);
    if (!s.ok) break;
    best = s;
    memory = next;
  }
  if (!all_positive(best.k)) {
    throw Error(ErrorCode::kDegenerate,
                "fit produced a non-positive coefficient");
  }
  if (!identified(samples, best.k)) {
    throw Error(ErrorCode::kDegenerate,
                "samples do not cover both latency regimes");
  }

  FitResult out;
  out.coefficients = base;
  out.coefficients.k1 = best.k(0);
  out.coefficients.k2 = best.k(1);
  out.coefficients.k3 = best.k(2);
  out.coefficients.k4 = best.k(3);
  out.iterations = iterations;
  for (size_t i = 0; i < samples.size(); ++i) {
    const ProfileSample& s = samples[i];
    const double predicted =
        decode_step_latency(out.coefficients, s.kv_cache, s.n_running);
    const double r = predicted - s.latency;
    out.rss += r * r;
    out.max_rel_residual =
        std::max(out.max_rel_residual, std::abs(r) / s.latency);
    (memory[i] ? out.memory_bound : out.compute_bound) += 1;
  }
  return out;
}

std::vector<ProfileSample> generate_profile(const CostCoefficients& c,
                                            int count, double noise,
                                            uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int64_t> n_dist(1, 256);
  std::uniform_real_distribution<double> per_traj(64.0, 1024.0);
  std::normal_distribution<double> eps(0.0, 1.0);
  std::vector<ProfileSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    ProfileSample s;
    s.n_running = n_dist(rng);
    s.kv_cache = std::round(per_traj(rng) * static_cast<double>(s.n_running));
    s.latency = decode_step_latency(c, s.kv_cache, s.n_running) *
                (1.0 + noise * eps(rng));
    out.push_back(s);
  }
  return out;
}

std::vector<ProfileSample> parse_profile(std::istream& in) {
  std::vector<ProfileSample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    ProfileSample s;
    if (!(fields >> s.kv_cache)) continue;
    std::string rest;
    if (!(fields >> s.n_running >> s.latency) || (fields >> rest)) {
      throw Error(ErrorCode::kInvalidInput,
                  "profile line " + std::to_string(line_no) +
                      " needs kv_cache, n_running, latency");
    }
    out.push_back(s);
  }
  return out;
}

std::vector<ProfileSample> load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open " + path);
  return parse_profile(in);
}

void write_profile(std::ostream& out, const std::vector<ProfileSample>& s) {
  out << "# kv_cache n_running latency\n";
  out.precision(17);
  for (const ProfileSample& p : s) {
    out << p.kv_cache << " " << p.n_running << " " << p.latency << "\n";
  }
}

std::string coefficients_to_json(const CostCoefficients& c) {
  nlohmann::ordered_json j;
  j["k1"] = c.k1;
  j["k2"] = c.k2;
  j["k3"] = c.k3;
  j["k4"] = c.k4;
  j["k5"] = c.k5;
  j["M"] = c.M;
  return j.dump(2);
}

CostCoefficients coefficients_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  CostCoefficients c;
  c.k1 = j.at("k1").get<double>();
  c.k2 = j.at("k2").get<double>();
  c.k3 = j.at("k3").get<double>();
  c.k4 = j.at("k4").get<double>();
  c.k5 = j.value("k5", c.k5);
  c.M = j.value("M", c.M);
  return c;
}

}  // namespace stalesim
