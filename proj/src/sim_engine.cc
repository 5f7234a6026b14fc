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


#include "stalesim/sim_engine.h"

#include <algorithm>
#include <deque>
#include <queue>
#include <set>
#include <tuple>

#include "json.hpp"

namespace stalesim {

using nlohmann::json;

namespace {

// Declaration order is the tie-break at equal timestamps.
enum class EventKind : uint8_t {
  kTrainDone,
  kPushDone,
  kPullDone,
  kRewardDone,
  kPrefillDone,
  kDecodeTick,
  kCommandArrive,
  kSnapshotDue,
};

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::kSnapshotDue;
  uint64_t seq = 0;
  InstanceId inst = -1;
  uint64_t epoch = 0;
  uint64_t a = 0;
  uint64_t b = 0;
};

struct Later {
  bool operator()(const Event& x, const Event& y) const {
    return std::tie(x.time, x.kind, x.seq) > std::tie(y.time, y.kind, y.seq);
  }
};

struct Instance {
  InstanceId id = 0;
  Version version = 0;
  // Admission order, oldest first.
  std::vector<TrajId> run;
  std::deque<TrajId> wait;
  std::vector<TrajId> complete;
  // Routed while a Pull was in progress.
  std::vector<TrajId> pending;
  double kv = 0.0;
  bool pulling = false;
  bool busy = false;
  uint64_t epoch = 0;
  double tick_started = 0.0;
};

struct TrajState {
  InstanceId inst = -1;
  // No decoding and no completion; set when an Interrupt or Abort is issued.
  bool frozen = false;
  bool interrupt_pending = false;
  double return_time = 0.0;
  // Routed again before the interrupt that frees it has landed.
  bool rerouted = false;
  bool abort_requested = false;
};

struct Issued {
  CommandKind kind = CommandKind::kPull;
  InstanceId inst = 0;
  std::vector<TrajId> trajs;
  int remaining = 0;
};

template <typename C>
bool erase_value(C& c, TrajId id) {
  auto it = std::find(c.begin(), c.end(), id);
  if (it == c.end()) return false;
  c.erase(it);
  return true;
}

json hist_json(const std::map<int64_t, int64_t>& h) {
  json j = json::object();
  for (const auto& [k, v] : h) j[std::to_string(k)] = v;
  return j;
}

}  // namespace

std::string RunSummary::to_json() const {
  json j;
  j["suite"] = suite;
  j["seed"] = seed;
  j["total_tokens"] = total_tokens;
  j["sim_duration"] = sim_duration;
  j["throughput"] = throughput;
  j["snapshots_accepted"] = snapshots_accepted;
  j["snapshots_rejected"] = snapshots_rejected;
  j["commands"] = commands;
  j["preemptions"] = preemptions;
  j["aborted"] = aborted;
  j["consumed"] = consumed;
  j["ingested_groups"] = ingested_groups;
  j["busy"] = {{"decode", busy.decode},
               {"prefill", busy.prefill},
               {"pull", busy.pull},
               {"commands", busy.commands}};
  j["staleness"] = hist_json(staleness);
  j["steps"] = json::array();
  for (const StepRecord& s : steps) {
    j["steps"].push_back({{"step", s.step},
                          {"v_buf", s.v_buf},
                          {"consume_time", s.consume_time},
                          {"done_time", s.done_time},
                          {"step_time", s.step_time},
                          {"trajectories", s.trajectories},
                          {"max_len", s.max_len},
                          {"mean_len", s.mean_len},
                          {"staleness", hist_json(s.staleness)}});
  }
  return j.dump(2);
}

struct Simulator::Impl {
  Impl(const ExperimentConfig& c, uint64_t s)
      : cfg(c),
        seed(s),
        cost(c.cost()),
        ledger(c.ledger()),
        ts((c.eta + 1) * c.ledger().buffer_capacity(),
           c.ledger().members_per_group(), c.lengths, s),
        coordinator(instance_ids(c), c.strategy, c.suite, c.cost()) {
    cfg.validate();
    for (InstanceId id = 0; id < cfg.num_instances; ++id) {
      Instance inst;
      inst.id = id;
      instances.push_back(inst);
    }
    push_duration = cfg.latencies.push;
    if (cfg.ps_topology) {
      push_duration = plan_communication(*cfg.ps_topology).makespan();
    }
    summary.suite = cfg.suite.name();
    summary.seed = seed;
    ingest();
    schedule(0.0, EventKind::kSnapshotDue);
  }

  static std::vector<InstanceId> instance_ids(const ExperimentConfig& c) {
    std::vector<InstanceId> ids;
    for (InstanceId i = 0; i < c.num_instances; ++i) ids.push_back(i);
    return ids;
  }

  // ---- plumbing ----

  void schedule(double time, EventKind kind, InstanceId inst = -1,
                uint64_t epoch = 0, uint64_t a = 0, uint64_t b = 0) {
    events.push(Event{time, kind, next_seq++, inst, epoch, a, b});
  }

  void emit(json record) {
    record["t"] = now;
    trace.push_back(record.dump());
  }

  Instance& instance(InstanceId id) {
    if (id < 0 || id >= static_cast<InstanceId>(instances.size())) {
      throw Error(ErrorCode::kUnknownInstance, std::to_string(id));
    }
    return instances[id];
  }

  TrajState& state(TrajId id) { return states[id]; }

  double kv_of(TrajId id) const {
    return cost.k5 * static_cast<double>(ts.get(id).total_len());
  }

  void ingest() {
    const int n = ts.ingest();
    if (n == 0) return;
    summary.ingested_groups += n;
    emit({{"kind", "ingest"}, {"groups", n}});
  }

  // ---- instance activity ----

  int64_t active_count(const Instance& inst) {
    return std::count_if(inst.run.begin(), inst.run.end(),
                         [&](TrajId id) { return !state(id).frozen; });
  }

  void remove_from_instance(Instance& inst, TrajId id) {
    if (erase_value(inst.run, id)) {
      inst.kv -= kv_of(id);
      if (inst.kv < 1e-9) inst.kv = 0.0;
    } else if (!erase_value(inst.wait, id)) {
      erase_value(inst.pending, id);
    }
  }

  void kick(Instance& inst) {
    if (inst.busy || inst.pulling) return;
    const double M = cost.M;
    int64_t active = active_count(inst);
    // Preempt newest-first until the next tick fits in the budget.
    while (active > 0 && inst.kv + cost.k5 * active > M) {
      for (auto it = inst.run.rbegin(); it != inst.run.rend(); ++it) {
        if (state(*it).frozen) continue;
        const TrajId id = *it;
        inst.run.erase(std::next(it).base());
        inst.kv -= kv_of(id);
        inst.wait.push_back(id);
        ts.get(id).lifecycle = Lifecycle::kWaiting;
        ++summary.preemptions;
        --active;
        break;
      }
    }
    double prefill_tokens = 0.0;
    for (auto it = inst.wait.begin(); it != inst.wait.end();) {
      if (state(*it).frozen) {
        ++it;
        continue;
      }
      const double need = kv_of(*it);
      if (inst.kv + need + cost.k5 * (active + 1) > M) break;
      inst.kv += need;
      inst.run.push_back(*it);
      ts.get(*it).lifecycle = Lifecycle::kRunning;
      prefill_tokens += need / cost.k5;
      ++active;
      it = inst.wait.erase(it);
    }
    if (prefill_tokens > 0.0) {
      const double d = cfg.latencies.k_prefill * prefill_tokens;
      summary.busy.prefill += d;
      inst.busy = true;
      schedule(now + d, EventKind::kPrefillDone, inst.id, inst.epoch);
      return;
    }
    if (active > 0) {
      inst.busy = true;
      inst.tick_started = now;
      schedule(now + decode_step_latency(cost, inst.kv, active),
               EventKind::kDecodeTick, inst.id, inst.epoch);
    }
  }

  void on_prefill_done(const Event& e) {
    Instance& inst = instance(e.inst);
    if (e.epoch != inst.epoch) return;
    inst.busy = false;
    kick(inst);
  }

  void on_decode_tick(const Event& e) {
    Instance& inst = instance(e.inst);
    if (e.epoch != inst.epoch) return;
    inst.busy = false;
    summary.busy.decode += now - inst.tick_started;
    int64_t tokens = 0;
    std::vector<TrajId> done;
    for (TrajId id : inst.run) {
      if (state(id).frozen) continue;
      Trajectory& t = ts.get(id);
      ++t.generated_len;
      ++tokens;
      if (t.generated_len >= t.target_len) done.push_back(id);
    }
    inst.kv += cost.k5 * static_cast<double>(tokens);
    summary.total_tokens += tokens;
    last_progress = now;
    if (cfg.trace_decode_ticks) {
      emit({{"kind", "tick"},
            {"inst", inst.id},
            {"n", tokens},
            {"kv", inst.kv},
            {"dt", now - inst.tick_started}});
    }
    for (TrajId id : done) {
      remove_from_instance(inst, id);
      inst.complete.push_back(id);
      Trajectory& t = ts.get(id);
      t.lifecycle = Lifecycle::kRewarding;
      emit({{"kind", "generated"},
            {"inst", inst.id},
            {"traj", id},
            {"len", t.generated_len}});
      schedule(now + cfg.latencies.reward, EventKind::kRewardDone, inst.id, 0,
               id);
    }
    kick(inst);
  }

  // ---- commands ----

  uint64_t issue(const Command& cmd) {
    const uint64_t id = next_command++;
    Version record_version = ps.version();
    if (cmd.kind == CommandKind::kPull) {
      record_version = ps.version_for_new_reader();
    }
    coordinator.record(cmd, record_version);
    ++summary.commands[std::string(to_string(cmd.kind))];
    json rec = {{"kind", "command"},
                {"id", id},
                {"cmd", to_string(cmd.kind)},
                {"inst", cmd.inst},
                {"trajs", cmd.trajs}};
    if (cmd.kind == CommandKind::kPull) rec["version"] = record_version;
    emit(rec);

    Issued issued{cmd.kind, cmd.inst, cmd.trajs, 1};
    Instance& inst = instance(cmd.inst);
    switch (cmd.kind) {
      case CommandKind::kInterrupt: {
        const double at = now + cfg.latencies.interrupt;
        summary.busy.commands += cfg.latencies.interrupt;
        for (TrajId t : cmd.trajs) {
          TrajState& st = state(t);
          st.frozen = true;
          st.interrupt_pending = true;
          st.return_time = at;
        }
        schedule(at, EventKind::kCommandArrive, cmd.inst, 0, id);
        break;
      }
      case CommandKind::kAbort: {
        const double at = now + cfg.latencies.interrupt;
        summary.busy.commands += cfg.latencies.interrupt;
        for (TrajId t : cmd.trajs) {
          state(t).frozen = true;
          state(t).abort_requested = true;
        }
        schedule(at, EventKind::kCommandArrive, cmd.inst, 0, id);
        break;
      }
      case CommandKind::kRoute: {
        issued.remaining = static_cast<int>(cmd.trajs.size());
        summary.busy.commands += cfg.latencies.route;
        for (TrajId t : cmd.trajs) {
          TrajState& st = state(t);
          double start = now;
          if (ts.in_pool(t)) {
            ts.take(t);
          } else if (st.interrupt_pending) {
            st.rerouted = true;
            start = std::max(now, st.return_time);
          } else {
            throw std::logic_error("route of a trajectory outside the server");
          }
          st.inst = cmd.inst;
          schedule(start + cfg.latencies.route, EventKind::kCommandArrive,
                   cmd.inst, 0, id, t);
        }
        break;
      }
      case CommandKind::kPull: {
        inst.pulling = true;
        inst.busy = false;
        ++inst.epoch;
        // Whatever still decodes loses its cache with the old weights.
        for (auto it = inst.run.rbegin(); it != inst.run.rend(); ++it) {
          if (state(*it).frozen) continue;
          inst.wait.push_front(*it);
          ts.get(*it).lifecycle = Lifecycle::kWaiting;
        }
        std::erase_if(inst.run, [&](TrajId t) { return !state(t).frozen; });
        inst.kv = 0.0;
        for (TrajId t : inst.run) inst.kv += kv_of(t);
        const uint64_t req = ps.pull(inst.id, cfg.latencies.pull);
        pull_command[req] = id;
        pump_ps();
        break;
      }
    }
    inflight.emplace(id, std::move(issued));
    return id;
  }

  void settle(uint64_t id) {
    Issued& c = inflight.at(id);
    if (--c.remaining > 0) return;
    emit({{"kind", "effect"}, {"id", id}, {"cmd", to_string(c.kind)},
          {"inst", c.inst}});
    inflight.erase(id);
  }

  void finalize_abort(TrajId id) {
    Trajectory& t = ts.get(id);
    if (t.lifecycle == Lifecycle::kAborted) return;
    ts.discard(id);
    TrajState& st = state(id);
    st.frozen = false;
    st.inst = -1;
    ++summary.aborted;
    emit({{"kind", "aborted"}, {"traj", id}, {"len", t.generated_len}});
  }

  void on_arrive(const Event& e) {
    const uint64_t id = e.a;
    Issued& c = inflight.at(id);
    Instance& inst = instance(c.inst);
    switch (c.kind) {
      case CommandKind::kInterrupt:
        for (TrajId t : c.trajs) {
          TrajState& st = state(t);
          remove_from_instance(inst, t);
          st.interrupt_pending = false;
          if (st.abort_requested && !st.rerouted) {
            finalize_abort(t);
          } else if (st.rerouted) {
            ts.get(t).lifecycle = Lifecycle::kRouted;
          } else {
            ts.return_interrupted(t);
            st.frozen = false;
            st.inst = -1;
          }
        }
        settle(id);
        kick(inst);
        break;
      case CommandKind::kAbort:
        for (TrajId t : c.trajs) {
          const Lifecycle l = ts.get(t).lifecycle;
          if (l == Lifecycle::kRunning || l == Lifecycle::kWaiting ||
              std::find(inst.pending.begin(), inst.pending.end(), t) !=
                  inst.pending.end()) {
            remove_from_instance(inst, t);
            finalize_abort(t);
          }
        }
        settle(id);
        kick(inst);
        break;
      case CommandKind::kRoute: {
        const TrajId t = e.b;
        TrajState& st = state(t);
        st.frozen = false;
        st.rerouted = false;
        if (st.abort_requested) {
          finalize_abort(t);
        } else if (inst.pulling) {
          inst.pending.push_back(t);
          ts.get(t).lifecycle = Lifecycle::kRouted;
        } else {
          inst.wait.push_back(t);
          ts.get(t).lifecycle = Lifecycle::kWaiting;
        }
        settle(id);
        kick(inst);
        break;
      }
      case CommandKind::kPull:
        break;
    }
  }

  // Cancels trajectories the ledger dropped (redundancy surplus or members
  // of aborted entries), issuing Abort commands where the instance holds them.
  void drop(const std::vector<TrajId>& ids) {
    std::map<InstanceId, std::vector<TrajId>> per_inst;
    for (TrajId id : ids) {
      Trajectory& t = ts.get(id);
      TrajState& st = state(id);
      if (st.abort_requested) continue;
      switch (t.lifecycle) {
        case Lifecycle::kInServer:
          finalize_abort(id);
          break;
        case Lifecycle::kCompleted:
          t.lifecycle = Lifecycle::kAborted;
          ++summary.aborted;
          break;
        case Lifecycle::kAborted:
          break;
        case Lifecycle::kRewarding:
          st.abort_requested = true;
          break;
        case Lifecycle::kRouted:
        case Lifecycle::kRunning:
        case Lifecycle::kWaiting:
          if (st.interrupt_pending && !st.rerouted) {
            st.abort_requested = true;
          } else {
            per_inst[st.inst].push_back(id);
          }
          break;
      }
    }
    for (auto& [inst, trajs] : per_inst) {
      issue(Command{CommandKind::kAbort, inst, trajs});
    }
  }

  // ---- reward and training ----

  void on_reward_done(const Event& e) {
    const TrajId id = e.a;
    Trajectory& t = ts.get(id);
    if (state(id).abort_requested) {
      finalize_abort(id);
      return;
    }
    if (t.lifecycle != Lifecycle::kRewarding) return;
    t.lifecycle = Lifecycle::kCompleted;
    if (ledger.tracks_trajectory(id)) {
      if (auto occ = ledger.mark_complete(id)) {
        emit({{"kind", "occupy"},
              {"group", occ->key},
              {"buffer", occ->buffer},
              {"surplus", occ->aborted}});
        drop(occ->aborted);
      }
    }
    try_train();
  }

  void try_train() {
    if (trainer_busy || steps_started >= cfg.num_training_steps) return;
    if (ledger.state_of(ledger.consumed_upto()) != BufferState::kReady) return;
    ConsumedBatch batch = ledger.consume();
    StepRecord rec;
    rec.step = steps_started++;
    rec.v_buf = batch.v_buf;
    rec.consume_time = now;
    rec.step_time = now - last_consume;
    last_consume = now;
    json members = json::array();
    double total_len = 0.0;
    for (const BufferEntry& entry : batch.entries) {
      for (const Member& m : entry.members) {
        const Trajectory& t = ts.get(m.id);
        const int64_t staleness = batch.v_buf - *m.version;
        ++rec.staleness[staleness];
        ++summary.staleness[staleness];
        ++rec.trajectories;
        rec.max_len = std::max(rec.max_len, t.generated_len);
        total_len += static_cast<double>(t.generated_len);
        members.push_back({m.id, *m.version, t.generated_len});
      }
      ts.retire_group(entry.key);
    }
    summary.consumed += rec.trajectories;
    if (rec.trajectories > 0) rec.mean_len = total_len / rec.trajectories;
    std::vector<TrajId> dropped;
    for (GroupKey key : batch.aborted_groups) {
      ts.retire_group(key);
      for (TrajId id : ts.members(key)) dropped.push_back(id);
    }
    emit({{"kind", "consume"},
          {"step", rec.step},
          {"v_buf", batch.v_buf},
          {"members", members},
          {"aborted_groups", batch.aborted_groups}});
    drop(dropped);
    steps.push_back(rec);
    ingest();
    trainer_busy = true;
    const double d = cfg.latencies.train +
                     cfg.latencies.train_per_token * total_len;
    schedule(now + d, EventKind::kTrainDone, -1, 0, rec.step);
  }

  void on_train_done(const Event& e) {
    trainer_busy = false;
    StepRecord& rec = steps.at(e.a);
    rec.done_time = now;
    last_progress = now;
    emit({{"kind", "train_done"}, {"step", rec.step}});
    ++steps_done;
    ps.push(static_cast<Version>(rec.step) + 1, push_duration);
    pump_ps();
    if (steps_done >= cfg.num_training_steps) {
      done = true;
      end_time = now;
      return;
    }
    try_train();
  }

  // ---- parameter server ----

  void pump_ps() {
    for (const PsGrant& g : ps.start_ready(now)) {
      grants[g.request] = g;
      emit({{"kind", "ps"},
            {"op", g.op == PsOp::kPush ? "push" : "pull"},
            {"inst", g.inst},
            {"start", g.start},
            {"end", g.end},
            {"version", g.version}});
      schedule(g.end,
               g.op == PsOp::kPush ? EventKind::kPushDone
                                   : EventKind::kPullDone,
               g.inst, 0, g.request);
    }
  }

  void on_push_done(const Event& e) {
    ps.complete(e.a);
    emit({{"kind", "push_done"}, {"version", ps.version()}});
    grants.erase(e.a);
    pump_ps();
  }

  void on_pull_done(const Event& e) {
    ps.complete(e.a);
    const PsGrant g = grants.at(e.a);
    grants.erase(e.a);
    Instance& inst = instance(g.inst);
    summary.busy.pull += g.end - g.start;
    inst.version = g.version;
    inst.complete.clear();
    inst.pulling = false;
    for (TrajId t : inst.pending) {
      if (state(t).abort_requested) {
        finalize_abort(t);
        continue;
      }
      inst.wait.push_back(t);
      ts.get(t).lifecycle = Lifecycle::kWaiting;
    }
    inst.pending.clear();
    settle(pull_command.at(e.a));
    pull_command.erase(e.a);
    kick(inst);
    pump_ps();
  }

  // ---- coordination ----

  Snapshot snapshot() const {
    Snapshot s;
    for (const Instance& inst : instances) {
      InstanceSnapshot snap;
      snap.id = inst.id;
      snap.kv_cache = inst.kv;
      snap.run = inst.run;
      snap.wait.assign(inst.wait.begin(), inst.wait.end());
      snap.complete = inst.complete;
      snap.inst_version = inst.version;
      s.push_back(std::move(snap));
    }
    return s;
  }

  TsTrajectory describe(TrajId id) const {
    const Trajectory& t = ts.get(id);
    return TsTrajectory{id, t.group, t.v_traj,
                        static_cast<double>(t.total_len())};
  }

  TsView ts_view() const {
    TsView view;
    for (TrajId id : ts.pool()) {
      view.trajs.push_back(describe(id));
      const GroupKey g = ts.get(id).group;
      if (!view.members.contains(g)) view.members[g] = ts.members(g);
    }
    for (const Instance& inst : instances) {
      for (TrajId id : inst.run) view.remote[id] = describe(id);
      for (TrajId id : inst.wait) view.remote[id] = describe(id);
    }
    return view;
  }

  void on_snapshot() {
    const Snapshot s = snapshot();
    const bool accepted = coordinator.accept(s);
    json loads = json::array();
    for (const InstanceSnapshot& inst : s) {
      loads.push_back({inst.id, inst.run.size(), inst.wait.size(),
                       inst.complete.size(), inst.kv_cache, inst.inst_version});
    }
    emit({{"kind", "snapshot"}, {"accepted", accepted}, {"loads", loads}});
    if (accepted) {
      ++summary.snapshots_accepted;
      const CoordinationPlan plan =
          coordinator.plan(s, ts_view(), ps.version(), ledger);
      for (const VersionAssignment& a : plan.assignments) {
        ledger.admit(a.group, a.traj, a.version, ts.members(a.group));
        ts.get(a.traj).v_traj = a.version;
      }
      for (const Command& cmd : plan.commands) issue(cmd);
    } else {
      ++summary.snapshots_rejected;
    }
    if (now - last_progress > cfg.stall_timeout) {
      throw Error(ErrorCode::kDeadlock,
                  "no progress for " + std::to_string(cfg.stall_timeout) +
                      " simulated seconds at t=" + std::to_string(now) +
                      "\n" + ledger.dump());
    }
    schedule(now + cfg.snapshot_period, EventKind::kSnapshotDue);
  }

  // ---- loop ----

  bool step() {
    if (done) return false;
    if (events.empty()) {
      throw Error(ErrorCode::kDeadlock, "event queue drained");
    }
    const Event e = events.top();
    events.pop();
    now = e.time;
    switch (e.kind) {
      case EventKind::kTrainDone:
        on_train_done(e);
        break;
      case EventKind::kPushDone:
        on_push_done(e);
        break;
      case EventKind::kPullDone:
        on_pull_done(e);
        break;
      case EventKind::kRewardDone:
        on_reward_done(e);
        break;
      case EventKind::kPrefillDone:
        on_prefill_done(e);
        break;
      case EventKind::kDecodeTick:
        on_decode_tick(e);
        break;
      case EventKind::kCommandArrive:
        on_arrive(e);
        break;
      case EventKind::kSnapshotDue:
        on_snapshot();
        break;
    }
    return !done;
  }

  RunSummary make_summary() const {
    RunSummary s = summary;
    s.steps = steps;
    s.sim_duration = done ? end_time : now;
    s.throughput = s.sim_duration > 0.0
                       ? static_cast<double>(s.total_tokens) / s.sim_duration
                       : 0.0;
    return s;
  }

  ExperimentConfig cfg;
  uint64_t seed;
  CostCoefficients cost;
  BufferLedger ledger;
  TrajectoryServer ts;
  ParameterServer ps;
  Coordinator coordinator;
  std::vector<Instance> instances;
  std::map<TrajId, TrajState> states;
  std::map<uint64_t, Issued> inflight;
  std::map<uint64_t, PsGrant> grants;
  std::map<uint64_t, uint64_t> pull_command;
  std::priority_queue<Event, std::vector<Event>, Later> events;
  std::vector<std::string> trace;
  std::vector<StepRecord> steps;
  RunSummary summary;
  double push_duration = 0.0;
  double now = 0.0;
  double last_progress = 0.0;
  double last_consume = 0.0;
  double end_time = 0.0;
  uint64_t next_seq = 0;
  uint64_t next_command = 1;
  int steps_started = 0;
  int steps_done = 0;
  bool trainer_busy = false;
  bool done = false;
};

Simulator::Simulator(const ExperimentConfig& cfg, uint64_t seed)
    : impl_(std::make_unique<Impl>(cfg, seed)) {}

Simulator::~Simulator() = default;

bool Simulator::step() { return impl_->step(); }

RunResult Simulator::run() {
  while (impl_->step()) {
  }
  RunResult r;
  r.summary = impl_->make_summary();
  r.trace = impl_->trace;
  r.ledger_dump = impl_->ledger.dump();
  return r;
}

bool Simulator::finished() const { return impl_->done; }
double Simulator::now() const { return impl_->now; }
Snapshot Simulator::collect_snapshot() const { return impl_->snapshot(); }
RunSummary Simulator::summary() const { return impl_->make_summary(); }
const std::vector<std::string>& Simulator::trace() const {
  return impl_->trace;
}
const BufferLedger& Simulator::ledger() const { return impl_->ledger; }
const TrajectoryServer& Simulator::trajectory_server() const {
  return impl_->ts;
}
const ParameterServer& Simulator::parameter_server() const {
  return impl_->ps;
}
const Coordinator& Simulator::coordinator() const {
  return impl_->coordinator;
}

RunResult run_simulation(const ExperimentConfig& cfg, uint64_t seed) {
  Simulator sim(cfg, seed);
  return sim.run();
}

}  // namespace stalesim
