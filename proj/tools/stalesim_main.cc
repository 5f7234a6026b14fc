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

// Command-line driver: run, compare, fit, report.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stalesim/compare.h"
#include "stalesim/config.h"
#include "stalesim/cost_model.h"
#include "stalesim/report.h"
#include "stalesim/sim_engine.h"

namespace fs = std::filesystem;
using namespace stalesim;

namespace {

std::string out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("STALESIM_OUT")) return env;
  return "stalesim_out";
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

ExperimentConfig load(const std::string& path, const std::string& suite) {
  ExperimentConfig cfg = load_config(path);
  if (!suite.empty()) cfg.suite = SuiteFlags::parse(suite);
  return cfg;
}

int cmd_run(const std::string& config, uint64_t seed, const std::string& suite,
            const std::string& out) {
  const ExperimentConfig cfg = load(config, suite);
  const RunResult r = run_simulation(cfg, seed);
  const fs::path dir = out_dir(out);
  fs::create_directories(dir);
  std::string trace;
  for (const std::string& line : r.trace) trace += line + "\n";
  write_file(dir / "trace.jsonl", trace);
  write_file(dir / "summary.json", r.summary.to_json() + "\n");
  write_file(dir / "ledger.txt", r.ledger_dump);
  std::printf("suite %s seed %llu: %lld tokens in %.3f s, %.2f tokens/s\n",
              r.summary.suite.c_str(),
              static_cast<unsigned long long>(seed),
              static_cast<long long>(r.summary.total_tokens),
              r.summary.sim_duration, r.summary.throughput);
  std::printf("wrote %s\n", dir.string().c_str());
  return 0;
}

int cmd_compare(const std::string& config, const std::vector<uint64_t>& seeds,
                int threads, const std::string& out) {
  const ExperimentConfig cfg = load(config, "");
  const ComparisonReport report = compare_suites(cfg, seeds, threads);
  const fs::path dir = out_dir(out);
  fs::create_directories(dir);
  write_file(dir / "compare.csv", report.csv());
  write_file(dir / "compare.txt", report.table());
  std::cout << report.table();
  return 0;
}

int cmd_fit(const std::string& profile, const std::string& out) {
  const std::vector<ProfileSample> samples = load_profile(profile);
  const FitResult fit = fit_coefficients(samples);
  const CostCoefficients& c = fit.coefficients;
  std::printf("k1 %.6e\nk2 %.6e\nk3 %.6e\nk4 %.6e\n", c.k1, c.k2, c.k3, c.k4);
  std::printf("samples %zu (memory bound %d, compute bound %d)\n",
              samples.size(), fit.memory_bound, fit.compute_bound);
  std::printf("rss %.6e\nmax relative residual %.4f%%\n", fit.rss,
              100.0 * fit.max_rel_residual);
  if (!out.empty()) {
    fs::create_directories(out);
    write_file(fs::path(out) / "coefficients.json",
               coefficients_to_json(c) + "\n");
  }
  return 0;
}

int cmd_report(const std::string& trace, const std::string& out) {
  const TraceReport report = load_report(trace);
  const fs::path dir = out_dir(out);
  write_report(report, dir.string());
  std::cout << report.staleness_csv() << '\n' << report.breakdown_csv();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staleness-bounded rollout simulator"};
  app.require_subcommand(1);

  std::string config, suite, out, profile, trace;
  uint64_t seed = 1;
  std::vector<uint64_t> seeds{1, 2, 3};
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "Simulate one (config, seed)");
  run->add_option("--config", config, "Experiment config")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--suite", suite, "staleflow, vanilla or mixed:RSM");
  run->add_option("--out", out, "Output directory (default $STALESIM_OUT)");

  CLI::App* compare =
      app.add_subcommand("compare", "Run all eight strategy combinations");
  compare->add_option("--config", config, "Experiment config")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--seeds", seeds, "Comma separated seeds")
      ->delimiter(',');
  compare->add_option("--threads", threads, "Worker threads");
  compare->add_option("--out", out, "Output directory");

  CLI::App* fit = app.add_subcommand("fit", "Fit k1..k4 to a latency profile");
  fit->add_option("--profile", profile, "Profile file")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--out", out, "Directory for coefficients.json");

  CLI::App* report = app.add_subcommand("report", "Tabulate a trace");
  report->add_option("--trace", trace, "trace.jsonl")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--out", out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, seed, suite, out);
    if (*compare) return cmd_compare(config, seeds, threads, out);
    if (*fit) return cmd_fit(profile, out);
    if (*report) return cmd_report(trace, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
