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

#include "stalesim/compare.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

#include "stalesim/sim_engine.h"

namespace stalesim {

std::vector<SuiteFlags> all_suites() {
  std::vector<SuiteFlags> out;
  for (int bits = 7; bits >= 0; --bits) {
    out.push_back(SuiteFlags{(bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0});
  }
  return out;
}

const SuiteResult& ComparisonReport::row(const SuiteFlags& suite) const {
  for (const SuiteResult& r : rows) {
    if (r.suite == suite) return r;
  }
  throw Error(ErrorCode::kInvalidInput, "no row for suite " + suite.name());
}

std::string ComparisonReport::table() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %-10s %-10s %14s %12s %9s\n",
                "routing", "sync", "migration", "tokens/s", "step_time",
                "gain");
  out << line;
  auto label = [](bool on) { return on ? "staleflow" : "vanilla"; };
  for (const SuiteResult& r : rows) {
    std::snprintf(line, sizeof(line), "%-10s %-10s %-10s %14.2f %12.3f %+8.2f%%\n",
                  label(r.suite.routing), label(r.suite.sync),
                  label(r.suite.migration), r.mean_throughput,
                  r.mean_step_time, 100.0 * r.gain);
    out << line;
  }
  return out.str();
}

std::string ComparisonReport::csv() const {
  std::ostringstream out;
  out << "suite,routing,sync,migration,mean_throughput,mean_step_time,gain";
  for (uint64_t s : seeds) out << ",seed" << s;
  out << '\n';
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
  };
  for (const SuiteResult& r : rows) {
    out << r.suite.name() << ',' << r.suite.routing << ',' << r.suite.sync
        << ',' << r.suite.migration << ',' << num(r.mean_throughput) << ','
        << num(r.mean_step_time) << ',' << num(r.gain);
    for (double t : r.throughput) out << ',' << num(t);
    out << '\n';
  }
  return out.str();
}

ComparisonReport compare_suites(const ExperimentConfig& cfg,
                                const std::vector<uint64_t>& seeds,
                                int threads) {
  if (seeds.empty()) {
    throw Error(ErrorCode::kInvalidInput, "compare needs at least one seed");
  }
  cfg.validate();
  const std::vector<SuiteFlags> suites = all_suites();
  const size_t jobs = suites.size() * seeds.size();
  std::vector<RunSummary> results(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < jobs; i = next++) {
      ExperimentConfig c = cfg;
      c.suite = suites[i / seeds.size()];
      try {
        results[i] = run_simulation(c, seeds[i % seeds.size()]).summary;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  size_t n = threads > 0 ? threads : std::thread::hardware_concurrency();
  n = std::clamp<size_t>(n, 1, jobs);
  std::vector<std::thread> pool;
  for (size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ComparisonReport report;
  report.seeds = seeds;
  for (size_t s = 0; s < suites.size(); ++s) {
    SuiteResult row;
    row.suite = suites[s];
    double step_time = 0.0;
    int64_t steps = 0;
    for (size_t k = 0; k < seeds.size(); ++k) {
      const RunSummary& r = results[s * seeds.size() + k];
      row.throughput.push_back(r.throughput);
      row.mean_throughput += r.throughput / seeds.size();
      for (const StepRecord& st : r.steps) {
        step_time += st.step_time;
        ++steps;
      }
      for (auto [k2, v] : r.staleness) row.staleness[k2] += v;
    }
    if (steps > 0) row.mean_step_time = step_time / steps;
    report.rows.push_back(row);
  }
  const double base = report.rows.back().mean_throughput;
  for (SuiteResult& r : report.rows) {
    r.gain = base > 0.0 ? r.mean_throughput / base - 1.0 : 0.0;
  }
  return report;
}

}  // namespace stalesim
