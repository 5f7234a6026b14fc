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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stalesim/common.h"
#include "stalesim/cost_model.h"
#include "stalesim/staleness_manager.h"

namespace stalesim {

struct InstanceSnapshot {
  InstanceId id = 0;
  double kv_cache = 0.0;
  std::vector<TrajId> run;
  // Oldest first.
  std::vector<TrajId> wait;
  // Completed since the last Pull.
  std::vector<TrajId> complete;
  Version inst_version = 0;

  int64_t traj_count() const {
    return static_cast<int64_t>(run.size() + wait.size() + complete.size());
  }
  InstanceLoad load() const {
    return {kv_cache, static_cast<int64_t>(run.size()),
            static_cast<int64_t>(wait.size())};
  }
};

// One entry per instance, ascending id.
using Snapshot = std::vector<InstanceSnapshot>;

struct SpeculativeEntry {
  Version inst_version = 0;
  int64_t accum = 0;

  friend bool operator==(const SpeculativeEntry&,
                         const SpeculativeEntry&) = default;
};

using SpeculativeState = std::map<InstanceId, SpeculativeEntry>;

enum class CommandKind : uint8_t { kPull, kRoute, kInterrupt, kAbort };

std::string_view to_string(CommandKind kind);

struct Command {
  CommandKind kind = CommandKind::kPull;
  InstanceId inst = 0;
  std::vector<TrajId> trajs;

  friend bool operator==(const Command&, const Command&) = default;
};

struct StrategyConfig {
  double mu = 0.3;
  int phi_wait = 3;
  double phi_throughput = 5.0;

  void validate() const;

  friend bool operator==(const StrategyConfig&,
                         const StrategyConfig&) = default;
};

// Which strategies run the throughput-oriented variant; the others fall back
// to the plain load-balancing counterpart.
struct SuiteFlags {
  bool routing = true;
  bool sync = true;
  bool migration = true;

  // "staleflow", "vanilla", or "mixed:" followed by any of R, S, M.
  static SuiteFlags parse(std::string_view name);
  std::string name() const;

  friend bool operator==(const SuiteFlags&, const SuiteFlags&) = default;
};

struct TsTrajectory {
  TrajId id = 0;
  GroupKey group = 0;
  std::optional<Version> v_traj;
  // Prompt plus generated tokens: what a re-prefill has to rebuild.
  double length = 0.0;
};

struct TsView {
  std::vector<TsTrajectory> trajs;
  // Trajectories currently on instances, for strategies that send them back
  // to the server.
  std::map<TrajId, TsTrajectory> remote;
  // Every member of each group that has a trajectory in `trajs`.
  std::map<GroupKey, std::vector<TrajId>> members;
};

struct RouteDecision {
  InstanceId inst = 0;
  TrajId traj = 0;
  // V_traj handed to an initial trajectory.
  std::optional<Version> assigned;
};

struct VersionAssignment {
  TrajId traj = 0;
  GroupKey group = 0;
  Version version = 0;
};

struct CoordinationPlan {
  std::vector<Command> commands;
  // Ledger admissions implied by the Route commands, in issue order.
  std::vector<VersionAssignment> assignments;
};

// Accepts iff every instance matches the speculative version and count.
bool validate_snapshot(const Snapshot& s, const SpeculativeState& p);
SpeculativeState record_command(SpeculativeState p, const Command& cmd,
                                Version ps_version);

// For an initial trajectory also reports the V_traj it would take.
bool check_routable(const InstanceSnapshot& inst, const TsTrajectory& traj,
                    const BufferLedger& ledger,
                    Version* assigned = nullptr);

std::vector<TsTrajectory> mlq_order(std::vector<TsTrajectory> trajs);

std::vector<RouteDecision> routing_strategy(const Snapshot& s,
                                            const TsView& ts,
                                            const StrategyConfig& cfg,
                                            const CostCoefficients& cost,
                                            const BufferLedger& ledger);
// The tentative routing pass uses the waterfall router, or the plain
// load-balancing router when `waterfall` is false.
std::vector<InstanceId> synchronization_strategy(
    const Snapshot& s, const TsView& ts, Version ps_version,
    const StrategyConfig& cfg, const CostCoefficients& cost,
    const BufferLedger& ledger, bool waterfall = true);
std::vector<std::pair<InstanceId, std::vector<TrajId>>> migration_strategy(
    const Snapshot& s, const StrategyConfig& cfg, const CostCoefficients& cost);

std::vector<RouteDecision> vanilla_routing(const Snapshot& s,
                                           const TsView& ts,
                                           const BufferLedger& ledger);
std::vector<InstanceId> vanilla_synchronization(const Snapshot& s,
                                                Version ps_version);
std::vector<std::pair<InstanceId, std::vector<TrajId>>> vanilla_migration(
    const Snapshot& s);

// One coordination round on a validated snapshot: synchronization, then
// migration, then routing, each seeing the effects of the previous ones.
CoordinationPlan coordinate(const Snapshot& s, const TsView& ts,
                            Version ps_version, const StrategyConfig& cfg,
                            const SuiteFlags& suite,
                            const CostCoefficients& cost,
                            const BufferLedger& ledger);

// Owns the speculative state across rounds.
class Coordinator {
 public:
  Coordinator(const std::vector<InstanceId>& instances,
              const StrategyConfig& cfg, const SuiteFlags& suite,
              const CostCoefficients& cost);

  bool accept(const Snapshot& s) const { return validate_snapshot(s, p_); }
  CoordinationPlan plan(const Snapshot& s, const TsView& ts,
                        Version ps_version, const BufferLedger& ledger) const;
  void record(const Command& cmd, Version ps_version);

  const SpeculativeState& speculative() const { return p_; }
  const StrategyConfig& config() const { return cfg_; }
  const SuiteFlags& suite() const { return suite_; }

 private:
  StrategyConfig cfg_;
  SuiteFlags suite_;
  CostCoefficients cost_;
  SpeculativeState p_;
};

}  // namespace stalesim
