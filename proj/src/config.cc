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


#include "stalesim/config.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace stalesim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kConfigInvalid, where + " must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw Error(ErrorCode::kConfigInvalid,
                  "unknown field '" + (where.empty() ? "" : where + ".") +
                      key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kConfigInvalid,
                "field '" + (where.empty() ? "" : where + ".") + key +
                    "' has the wrong type");
  }
}

void positive(double value, const char* field) {
  if (!(value > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid,
                std::string(field) + " must be positive");
  }
}

void non_negative(double value, const char* field) {
  if (!(value >= 0.0)) {
    throw Error(ErrorCode::kConfigInvalid,
                std::string(field) + " must be non-negative");
  }
}

CommPlanInput topology_from_json(const json& j) {
  check_keys(j, {"slices", "senders"}, "ps_topology");
  CommPlanInput t;
  for (const json& s : j.at("slices")) {
    check_keys(s, {"id", "size", "receivers"}, "ps_topology.slices");
    SliceSpec slice;
    slice.id = s.at("id").get<int>();
    slice.size = s.at("size").get<double>();
    slice.receivers = s.at("receivers").get<std::vector<int>>();
    t.slices.push_back(slice);
  }
  for (const json& s : j.at("senders")) {
    check_keys(s, {"id", "holds", "bandwidth", "bandwidth_to", "latency"},
               "ps_topology.senders");
    SenderSpec sender;
    sender.id = s.at("id").get<int>();
    const auto holds = s.at("holds").get<std::vector<int>>();
    sender.holds = {holds.begin(), holds.end()};
    read(s, "bandwidth", sender.bandwidth, "ps_topology.senders");
    read(s, "latency", sender.latency, "ps_topology.senders");
    if (s.contains("bandwidth_to")) {
      for (const auto& [r, bw] : s.at("bandwidth_to").items()) {
        sender.bandwidth_to[std::stoi(r)] = bw.get<double>();
      }
    }
    t.senders.push_back(sender);
  }
  return t;
}

ordered_json topology_to_json(const CommPlanInput& t) {
  ordered_json j;
  j["slices"] = ordered_json::array();
  for (const SliceSpec& s : t.slices) {
    j["slices"].push_back(
        {{"id", s.id}, {"size", s.size}, {"receivers", s.receivers}});
  }
  j["senders"] = ordered_json::array();
  for (const SenderSpec& s : t.senders) {
    ordered_json o;
    o["id"] = s.id;
    o["holds"] = std::vector<int>(s.holds.begin(), s.holds.end());
    o["bandwidth"] = s.bandwidth;
    ordered_json to = ordered_json::object();
    for (const auto& [r, bw] : s.bandwidth_to) to[std::to_string(r)] = bw;
    o["bandwidth_to"] = to;
    o["latency"] = s.latency;
    j["senders"].push_back(o);
  }
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (eta < 0) throw Error(ErrorCode::kConfigInvalid, "eta must be >= 0");
  if (batch_size <= 0) {
    throw Error(ErrorCode::kConfigInvalid, "batch_size must be positive");
  }
  if (group_size <= 0) {
    throw Error(ErrorCode::kConfigInvalid, "group_size must be positive");
  }
  if (num_instances <= 0) {
    throw Error(ErrorCode::kConfigInvalid, "num_instances must be positive");
  }
  if (num_training_steps <= 0) {
    throw Error(ErrorCode::kConfigInvalid,
                "num_training_steps must be positive");
  }
  positive(kv_budget, "kv_budget");
  cost().validate();
  strategy.validate();
  non_negative(redundancy_ratio, "redundancy.ratio");
  positive(lengths.median, "lengths.median");
  non_negative(lengths.sigma, "lengths.sigma");
  if (lengths.max_response_len <= 0 || lengths.prompt_len < 0) {
    throw Error(ErrorCode::kConfigInvalid,
                "lengths.max_response_len must be positive and "
                "lengths.prompt_len non-negative");
  }
  if (lengths.group_correlation < 0.0 || lengths.group_correlation > 1.0) {
    throw Error(ErrorCode::kConfigInvalid,
                "lengths.group_correlation must be in [0, 1]");
  }
  const double longest =
      coefficients.k5 *
      static_cast<double>(lengths.prompt_len + lengths.max_response_len + 1);
  if (longest > kv_budget) {
    throw Error(ErrorCode::kConfigInvalid,
                "kv_budget cannot hold a single maximum-length trajectory");
  }
  non_negative(latencies.pull, "latencies.pull");
  non_negative(latencies.push, "latencies.push");
  non_negative(latencies.route, "latencies.route");
  non_negative(latencies.interrupt, "latencies.interrupt");
  non_negative(latencies.reward, "latencies.reward");
  non_negative(latencies.train, "latencies.train");
  non_negative(latencies.train_per_token, "latencies.train_per_token");
  non_negative(latencies.k_prefill, "latencies.k_prefill");
  positive(snapshot_period, "snapshot_period");
  positive(stall_timeout, "stall_timeout");
  ledger().validate();
}

LedgerConfig ExperimentConfig::ledger() const {
  LedgerConfig l;
  l.eta = eta;
  l.batch_size = batch_size;
  l.group_size = group_size;
  l.redundancy = redundancy;
  l.redundant_ratio = redundancy_ratio;
  return l;
}

CostCoefficients ExperimentConfig::cost() const {
  CostCoefficients c = coefficients;
  c.M = kv_budget;
  return c;
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfigInvalid, e.what());
  }
  check_keys(j,
             {"eta", "batch_size", "group_size", "num_instances", "kv_budget",
              "coefficients", "mu", "phi_wait", "phi_throughput",
              "redundancy", "lengths", "latencies", "snapshot_period",
              "num_training_steps", "suite", "ps_topology", "stall_timeout",
              "trace_decode_ticks"},
             "");
  ExperimentConfig c;
  read(j, "eta", c.eta, "");
  read(j, "batch_size", c.batch_size, "");
  read(j, "group_size", c.group_size, "");
  read(j, "num_instances", c.num_instances, "");
  read(j, "kv_budget", c.kv_budget, "");
  read(j, "mu", c.strategy.mu, "");
  read(j, "phi_wait", c.strategy.phi_wait, "");
  read(j, "phi_throughput", c.strategy.phi_throughput, "");
  read(j, "snapshot_period", c.snapshot_period, "");
  read(j, "num_training_steps", c.num_training_steps, "");
  read(j, "stall_timeout", c.stall_timeout, "");
  read(j, "trace_decode_ticks", c.trace_decode_ticks, "");

  if (j.contains("coefficients")) {
    const json& k = j.at("coefficients");
    check_keys(k, {"k1", "k2", "k3", "k4", "k5", "fit"}, "coefficients");
    read(k, "k1", c.coefficients.k1, "coefficients");
    read(k, "k2", c.coefficients.k2, "coefficients");
    read(k, "k3", c.coefficients.k3, "coefficients");
    read(k, "k4", c.coefficients.k4, "coefficients");
    read(k, "k5", c.coefficients.k5, "coefficients");
    if (k.contains("fit")) {
      std::string path;
      read(k, "fit", path, "coefficients");
      c.coefficients_profile = path;
    }
  }
  if (j.contains("redundancy")) {
    const json& r = j.at("redundancy");
    check_keys(r, {"level", "ratio"}, "redundancy");
    std::string level = "none";
    read(r, "level", level, "redundancy");
    c.redundancy = redundancy_from_string(level);
    read(r, "ratio", c.redundancy_ratio, "redundancy");
  }
  if (j.contains("lengths")) {
    const json& l = j.at("lengths");
    check_keys(l,
               {"median", "sigma", "max_response_len", "prompt_len",
                "group_correlation"},
               "lengths");
    read(l, "median", c.lengths.median, "lengths");
    read(l, "sigma", c.lengths.sigma, "lengths");
    read(l, "max_response_len", c.lengths.max_response_len, "lengths");
    read(l, "prompt_len", c.lengths.prompt_len, "lengths");
    read(l, "group_correlation", c.lengths.group_correlation, "lengths");
  }
  if (j.contains("latencies")) {
    const json& l = j.at("latencies");
    check_keys(l,
               {"pull", "push", "route", "interrupt", "reward", "train",
                "train_per_token", "k_prefill"},
               "latencies");
    read(l, "pull", c.latencies.pull, "latencies");
    read(l, "push", c.latencies.push, "latencies");
    read(l, "route", c.latencies.route, "latencies");
    read(l, "interrupt", c.latencies.interrupt, "latencies");
    read(l, "reward", c.latencies.reward, "latencies");
    read(l, "train", c.latencies.train, "latencies");
    read(l, "train_per_token", c.latencies.train_per_token, "latencies");
    read(l, "k_prefill", c.latencies.k_prefill, "latencies");
  }
  if (j.contains("suite")) {
    std::string suite;
    read(j, "suite", suite, "");
    c.suite = SuiteFlags::parse(suite);
  }
  if (j.contains("ps_topology")) {
    try {
      c.ps_topology = topology_from_json(j.at("ps_topology"));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kConfigInvalid,
                  std::string("ps_topology: ") + e.what());
    }
  }
  c.validate();
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["eta"] = c.eta;
  j["batch_size"] = c.batch_size;
  j["group_size"] = c.group_size;
  j["num_instances"] = c.num_instances;
  j["kv_budget"] = c.kv_budget;
  ordered_json k;
  k["k1"] = c.coefficients.k1;
  k["k2"] = c.coefficients.k2;
  k["k3"] = c.coefficients.k3;
  k["k4"] = c.coefficients.k4;
  k["k5"] = c.coefficients.k5;
  if (c.coefficients_profile) k["fit"] = *c.coefficients_profile;
  j["coefficients"] = k;
  j["mu"] = c.strategy.mu;
  j["phi_wait"] = c.strategy.phi_wait;
  j["phi_throughput"] = c.strategy.phi_throughput;
  j["redundancy"] = {{"level", std::string(to_string(c.redundancy))},
                     {"ratio", c.redundancy_ratio}};
  ordered_json l;
  l["median"] = c.lengths.median;
  l["sigma"] = c.lengths.sigma;
  l["max_response_len"] = c.lengths.max_response_len;
  l["prompt_len"] = c.lengths.prompt_len;
  l["group_correlation"] = c.lengths.group_correlation;
  j["lengths"] = l;
  ordered_json t;
  t["pull"] = c.latencies.pull;
  t["push"] = c.latencies.push;
  t["route"] = c.latencies.route;
  t["interrupt"] = c.latencies.interrupt;
  t["reward"] = c.latencies.reward;
  t["train"] = c.latencies.train;
  t["train_per_token"] = c.latencies.train_per_token;
  t["k_prefill"] = c.latencies.k_prefill;
  j["latencies"] = t;
  j["snapshot_period"] = c.snapshot_period;
  j["num_training_steps"] = c.num_training_steps;
  j["suite"] = c.suite.name();
  if (c.ps_topology) j["ps_topology"] = topology_to_json(*c.ps_topology);
  j["stall_timeout"] = c.stall_timeout;
  j["trace_decode_ticks"] = c.trace_decode_ticks;
  return j.dump(2);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigInvalid, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig c = config_from_json(buf.str());
  if (c.coefficients_profile) {
    std::filesystem::path profile(*c.coefficients_profile);
    if (profile.is_relative()) {
      profile = std::filesystem::path(path).parent_path() / profile;
    }
    const FitResult fit =
        fit_coefficients(load_profile(profile.string()), c.coefficients);
    c.coefficients = fit.coefficients;
  }
  c.validate();
  return c;
}

}  // namespace stalesim
