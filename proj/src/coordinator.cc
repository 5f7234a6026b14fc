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


#include "stalesim/coordinator.h"

#include <algorithm>
#include <set>

namespace stalesim {

std::string_view to_string(CommandKind kind) {
  switch (kind) {
    case CommandKind::kPull:
      return "Pull";
    case CommandKind::kRoute:
      return "Route";
    case CommandKind::kInterrupt:
      return "Interrupt";
    case CommandKind::kAbort:
      return "Abort";
  }
  return "?";
}

void StrategyConfig::validate() const {
  if (!(mu > 0.0 && mu <= 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "mu must be in (0, 1]");
  }
  if (phi_wait < 0) {
    throw Error(ErrorCode::kConfigInvalid, "phi_wait must be >= 0");
  }
  if (!(phi_throughput > 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "phi_throughput must be > 1");
  }
}

SuiteFlags SuiteFlags::parse(std::string_view name) {
  if (name == "staleflow") return {true, true, true};
  if (name == "vanilla") return {false, false, false};
  constexpr std::string_view kMixed = "mixed:";
  if (name.substr(0, kMixed.size()) == kMixed) {
    SuiteFlags f{false, false, false};
    for (char c : name.substr(kMixed.size())) {
      switch (c) {
        case 'R':
          f.routing = true;
          break;
        case 'S':
          f.sync = true;
          break;
        case 'M':
          f.migration = true;
          break;
        default:
          throw Error(ErrorCode::kConfigInvalid,
                      "suite letters must be R, S or M: " + std::string(name));
      }
    }
    return f;
  }
  throw Error(ErrorCode::kConfigInvalid,
              "suite must be staleflow, vanilla or mixed:<RSM>, got '" +
                  std::string(name) + "'");
}

std::string SuiteFlags::name() const {
  if (routing && sync && migration) return "staleflow";
  if (!routing && !sync && !migration) return "vanilla";
  std::string out = "mixed:";
  if (routing) out += 'R';
  if (sync) out += 'S';
  if (migration) out += 'M';
  return out;
}

bool validate_snapshot(const Snapshot& s, const SpeculativeState& p) {
  if (s.size() != p.size()) {
    throw Error(ErrorCode::kInstanceMismatch,
                "snapshot covers " + std::to_string(s.size()) +
                    " instances, speculative state " +
                    std::to_string(p.size()));
  }
  bool ok = true;
  for (const InstanceSnapshot& inst : s) {
    auto it = p.find(inst.id);
    if (it == p.end()) {
      throw Error(ErrorCode::kInstanceMismatch,
                  "instance " + std::to_string(inst.id) +
                      " missing from the speculative state");
    }
    ok = ok && it->second.inst_version == inst.inst_version &&
         it->second.accum == inst.traj_count();
  }
  return ok;
}

SpeculativeState record_command(SpeculativeState p, const Command& cmd,
                                Version ps_version) {
  auto it = p.find(cmd.inst);
  if (it == p.end()) {
    throw Error(ErrorCode::kUnknownInstance, std::to_string(cmd.inst));
  }
  SpeculativeEntry& e = it->second;
  const auto n = static_cast<int64_t>(cmd.trajs.size());
  switch (cmd.kind) {
    case CommandKind::kPull:
      e.inst_version = ps_version;
      e.accum = 0;
      break;
    case CommandKind::kRoute:
      e.accum += n;
      break;
    case CommandKind::kInterrupt:
    case CommandKind::kAbort:
      if (e.accum < n) {
        throw Error(ErrorCode::kNegativeCount,
                    std::string(to_string(cmd.kind)) + " of " +
                        std::to_string(n) + " on instance " +
                        std::to_string(cmd.inst) + " with accum " +
                        std::to_string(e.accum));
      }
      e.accum -= n;
      break;
  }
  return p;
}

bool check_routable(const InstanceSnapshot& inst, const TsTrajectory& traj,
                    const BufferLedger& ledger, Version* assigned) {
  if (traj.v_traj) return inst.inst_version >= *traj.v_traj;
  const Version v = inst.inst_version;
  const bool ok = ledger.tracks(traj.group)
                      ? ledger.verify_member_assignable(traj.group, v)
                      : ledger.verify_assignable(v);
  if (ok && assigned) *assigned = v;
  return ok;
}

std::vector<TsTrajectory> mlq_order(std::vector<TsTrajectory> trajs) {
  std::sort(trajs.begin(), trajs.end(),
            [](const TsTrajectory& a, const TsTrajectory& b) {
              if (a.v_traj.has_value() != b.v_traj.has_value()) {
                return a.v_traj.has_value();
              }
              if (a.v_traj != b.v_traj) return *a.v_traj < *b.v_traj;
              return a.id < b.id;
            });
  return trajs;
}

namespace {

InstanceSnapshot& find(Snapshot& s, InstanceId id) {
  for (InstanceSnapshot& inst : s) {
    if (inst.id == id) return inst;
  }
  throw Error(ErrorCode::kUnknownInstance, std::to_string(id));
}

// Hypothetical placement used when scoring a route.
void place(InstanceSnapshot& inst, const TsTrajectory& t,
           const CostCoefficients& cost) {
  const double kv = inst.kv_cache + cost.k5 * t.length;
  if (kv <= cost.M && inst.wait.empty()) {
    inst.kv_cache = kv;
    inst.run.push_back(t.id);
  } else {
    inst.wait.push_back(t.id);
  }
}

void admit(BufferLedger& ledger, const TsView& ts, const RouteDecision& d,
           const TsTrajectory& t) {
  if (!d.assigned) return;
  ledger.admit(t.group, t.id, *d.assigned, ts.members.at(t.group));
}

std::vector<RouteDecision> route_waterfall(Snapshot& s, const TsView& ts,
                                           const StrategyConfig& cfg,
                                           const CostCoefficients& cost,
                                           BufferLedger& ledger) {
  std::vector<RouteDecision> out;
  for (const TsTrajectory& t : mlq_order(ts.trajs)) {
    std::map<Version, std::vector<size_t>> groups;
    std::map<size_t, Version> versions;
    for (size_t i = 0; i < s.size(); ++i) {
      Version v = 0;
      if (check_routable(s[i], t, ledger, &v)) {
        groups[s[i].inst_version].push_back(i);
        versions[i] = v;
      }
    }
    if (groups.empty()) break;
    const double threshold = cfg.mu * ideal_gain(cost, t.length);
    std::optional<size_t> selected;
    for (const auto& [version, members] : groups) {
      std::optional<size_t> best;
      double best_gain = 0.0;
      for (size_t i : members) {
        const double g = marginal_gain(cost, s[i].load(), t.length);
        if (!best || g > best_gain) {
          best = i;
          best_gain = g;
        }
      }
      if (best_gain >= threshold) {
        selected = best;
        break;
      }
    }
    if (!selected) break;
    RouteDecision d{s[*selected].id, t.id, std::nullopt};
    if (!t.v_traj) d.assigned = versions[*selected];
    admit(ledger, ts, d, t);
    place(s[*selected], t, cost);
    out.push_back(d);
  }
  return out;
}

std::vector<RouteDecision> route_vanilla(Snapshot& s, const TsView& ts,
                                         const CostCoefficients& cost,
                                         BufferLedger& ledger) {
  std::vector<RouteDecision> out;
  for (const TsTrajectory& t : mlq_order(ts.trajs)) {
    std::optional<size_t> best;
    Version assigned = 0;
    for (size_t i = 0; i < s.size(); ++i) {
      Version v = 0;
      if (!check_routable(s[i], t, ledger, &v)) continue;
      const size_t load = s[i].run.size() + s[i].wait.size();
      if (!best || load < s[*best].run.size() + s[*best].wait.size()) {
        best = i;
        assigned = v;
      }
    }
    if (!best) continue;
    RouteDecision d{s[*best].id, t.id, std::nullopt};
    if (!t.v_traj) d.assigned = assigned;
    admit(ledger, ts, d, t);
    place(s[*best], t, cost);
    out.push_back(d);
  }
  return out;
}

void discard(InstanceSnapshot& inst, const std::vector<TrajId>& trajs,
             TsView& ts, const CostCoefficients& cost) {
  const std::set<TrajId> gone(trajs.begin(), trajs.end());
  for (TrajId id : inst.run) {
    if (gone.contains(id)) {
      inst.kv_cache -= cost.k5 * ts.remote.at(id).length;
    }
  }
  if (inst.kv_cache < 0.0) inst.kv_cache = 0.0;
  std::erase_if(inst.run, [&](TrajId id) { return gone.contains(id); });
  std::erase_if(inst.wait, [&](TrajId id) { return gone.contains(id); });
  for (TrajId id : trajs) ts.trajs.push_back(ts.remote.at(id));
}

}  // namespace

std::vector<RouteDecision> routing_strategy(const Snapshot& s,
                                            const TsView& ts,
                                            const StrategyConfig& cfg,
                                            const CostCoefficients& cost,
                                            const BufferLedger& ledger) {
  Snapshot work = s;
  BufferLedger scratch = ledger;
  return route_waterfall(work, ts, cfg, cost, scratch);
}

std::vector<InstanceId> synchronization_strategy(
    const Snapshot& s, const TsView& ts, Version ps_version,
    const StrategyConfig& cfg, const CostCoefficients& cost,
    const BufferLedger& ledger, bool waterfall) {
  std::vector<size_t> candidates;
  for (size_t i = 0; i < s.size(); ++i) {
    if (ps_version <= s[i].inst_version) continue;
    const bool can_route =
        std::any_of(ts.trajs.begin(), ts.trajs.end(),
                    [&](const TsTrajectory& t) {
                      return check_routable(s[i], t, ledger);
                    });
    if (!can_route) candidates.push_back(i);
  }
  std::vector<InstanceId> out;
  for (size_t i : candidates) {
    Snapshot temp = s;
    temp[i].inst_version = ps_version;
    BufferLedger scratch = ledger;
    const auto routing = waterfall
                             ? route_waterfall(temp, ts, cfg, cost, scratch)
                             : route_vanilla(temp, ts, cost, scratch);
    const bool routed_here =
        std::any_of(routing.begin(), routing.end(),
                    [&](const RouteDecision& d) { return d.inst == s[i].id; });
    if (routed_here) out.push_back(s[i].id);
  }
  return out;
}

std::vector<std::pair<InstanceId, std::vector<TrajId>>> migration_strategy(
    const Snapshot& s, const StrategyConfig& cfg,
    const CostCoefficients& cost) {
  std::vector<std::pair<InstanceId, std::vector<TrajId>>> out;
  Snapshot work = s;
  for (InstanceSnapshot& inst : work) {
    const auto wait_cnt = static_cast<int64_t>(inst.wait.size());
    if (wait_cnt <= cfg.phi_wait) continue;
    // Most recently enqueued first: the least prefill work is thrown away.
    std::vector<TrajId> excess(inst.wait.begin() + cfg.phi_wait,
                               inst.wait.end());
    std::reverse(excess.begin(), excess.end());
    inst.wait.resize(cfg.phi_wait);
    out.emplace_back(inst.id, std::move(excess));
  }
  if (work.empty()) return out;

  size_t max_i = 0;
  size_t min_i = 0;
  std::vector<double> tput(work.size());
  for (size_t i = 0; i < work.size(); ++i) {
    tput[i] = estimate_throughput(cost, work[i].load());
    if (tput[i] > tput[max_i]) max_i = i;
    if (tput[i] < tput[min_i]) min_i = i;
  }
  if (tput[min_i] <= 0.0 || tput[max_i] / tput[min_i] <= cfg.phi_throughput) {
    return out;
  }
  std::set<TrajId> taken;
  for (const auto& [inst, trajs] : out) {
    if (inst == work[max_i].id) taken.insert(trajs.begin(), trajs.end());
  }
  std::vector<TrajId> all;
  for (TrajId id : work[max_i].run) {
    if (!taken.contains(id)) all.push_back(id);
  }
  for (TrajId id : work[max_i].wait) {
    if (!taken.contains(id)) all.push_back(id);
  }
  if (!all.empty()) out.emplace_back(work[max_i].id, std::move(all));
  return out;
}

std::vector<RouteDecision> vanilla_routing(const Snapshot& s,
                                           const TsView& ts,
                                           const BufferLedger& ledger) {
  Snapshot work = s;
  BufferLedger scratch = ledger;
  return route_vanilla(work, ts, CostCoefficients{}, scratch);
}

std::vector<InstanceId> vanilla_synchronization(const Snapshot& s,
                                                Version ps_version) {
  std::vector<InstanceId> out;
  for (const InstanceSnapshot& inst : s) {
    if (inst.inst_version < ps_version) out.push_back(inst.id);
  }
  return out;
}

std::vector<std::pair<InstanceId, std::vector<TrajId>>> vanilla_migration(
    const Snapshot&) {
  return {};
}

CoordinationPlan coordinate(const Snapshot& s, const TsView& ts,
                            Version ps_version, const StrategyConfig& cfg,
                            const SuiteFlags& suite,
                            const CostCoefficients& cost,
                            const BufferLedger& ledger) {
  CoordinationPlan plan;
  Snapshot work = s;
  TsView view = ts;
  BufferLedger scratch = ledger;

  const auto sync =
      suite.sync
          ? synchronization_strategy(work, view, ps_version, cfg, cost,
                                     scratch, suite.routing)
          : vanilla_synchronization(work, ps_version);
  for (InstanceId id : sync) {
    InstanceSnapshot& inst = find(work, id);
    std::vector<TrajId> trajs = inst.run;
    trajs.insert(trajs.end(), inst.wait.begin(), inst.wait.end());
    if (!trajs.empty()) {
      plan.commands.push_back({CommandKind::kInterrupt, id, trajs});
    }
    plan.commands.push_back({CommandKind::kPull, id, {}});
    discard(inst, trajs, view, cost);
    inst.complete.clear();
    inst.inst_version = ps_version;
  }

  const auto migration = suite.migration ? migration_strategy(work, cfg, cost)
                                         : vanilla_migration(work);
  for (const auto& [id, trajs] : migration) {
    plan.commands.push_back({CommandKind::kInterrupt, id, trajs});
    discard(find(work, id), trajs, view, cost);
  }

  const auto routes =
      suite.routing ? route_waterfall(work, view, cfg, cost, scratch)
                    : route_vanilla(work, view, cost, scratch);
  std::map<TrajId, GroupKey> group_of;
  for (const TsTrajectory& t : view.trajs) group_of[t.id] = t.group;
  std::vector<InstanceId> order;
  std::map<InstanceId, std::vector<TrajId>> per_inst;
  for (const RouteDecision& d : routes) {
    if (!per_inst.contains(d.inst)) order.push_back(d.inst);
    per_inst[d.inst].push_back(d.traj);
    if (d.assigned) {
      plan.assignments.push_back({d.traj, group_of.at(d.traj), *d.assigned});
    }
  }
  for (InstanceId id : order) {
    plan.commands.push_back({CommandKind::kRoute, id, per_inst[id]});
  }
  return plan;
}

Coordinator::Coordinator(const std::vector<InstanceId>& instances,
                         const StrategyConfig& cfg, const SuiteFlags& suite,
                         const CostCoefficients& cost)
    : cfg_(cfg), suite_(suite), cost_(cost) {
  cfg_.validate();
  for (InstanceId id : instances) p_[id] = SpeculativeEntry{};
}

CoordinationPlan Coordinator::plan(const Snapshot& s, const TsView& ts,
                                   Version ps_version,
                                   const BufferLedger& ledger) const {
  return coordinate(s, ts, ps_version, cfg_, suite_, cost_, ledger);
}

void Coordinator::record(const Command& cmd, Version ps_version) {
  p_ = record_command(std::move(p_), cmd, ps_version);
}

}  // namespace stalesim
