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


#include "stalesim/parameter_server.h"

#include <algorithm>
#include <sstream>

namespace stalesim {

int ParameterServer::writers_ahead() const {
  int n = 0;
  for (const Request& r : queue_) n += r.op == PsOp::kPush;
  for (const auto& [id, g] : active_) n += g.op == PsOp::kPush;
  return n;
}

Version ParameterServer::version_for_new_reader() const {
  return version_ + writers_ahead();
}

uint64_t ParameterServer::push(Version version, double duration) {
  if (version != next_push_version()) {
    throw Error(ErrorCode::kVersionSkip,
                "push of version " + std::to_string(version) +
                    ", expected " + std::to_string(next_push_version()));
  }
  Request r;
  r.id = next_id_++;
  r.op = PsOp::kPush;
  r.duration = duration;
  r.version = version;
  queue_.push_back(r);
  return r.id;
}

uint64_t ParameterServer::pull(InstanceId inst, double duration) {
  Request r;
  r.id = next_id_++;
  r.op = PsOp::kPull;
  r.inst = inst;
  r.duration = duration;
  queue_.push_back(r);
  return r.id;
}

bool ParameterServer::writing() const {
  return std::any_of(active_.begin(), active_.end(), [](const auto& kv) {
    return kv.second.op == PsOp::kPush;
  });
}

int ParameterServer::active_readers() const {
  return static_cast<int>(std::count_if(
      active_.begin(), active_.end(),
      [](const auto& kv) { return kv.second.op == PsOp::kPull; }));
}

std::vector<PsGrant> ParameterServer::start_ready(double now) {
  std::vector<PsGrant> granted;
  while (!queue_.empty() && !writing()) {
    const Request& r = queue_.front();
    if (r.op == PsOp::kPush && !active_.empty()) break;
    PsGrant g;
    g.request = r.id;
    g.op = r.op;
    g.inst = r.inst;
    g.start = now;
    g.end = now + r.duration;
    g.version = r.op == PsOp::kPush ? r.version : version_;
    active_.emplace(g.request, g);
    history_.push_back(g);
    granted.push_back(g);
    queue_.pop_front();
  }
  return granted;
}

void ParameterServer::complete(uint64_t request) {
  auto it = active_.find(request);
  if (it == active_.end()) {
    throw Error(ErrorCode::kInvalidInput,
                "request " + std::to_string(request) + " is not active");
  }
  if (it->second.op == PsOp::kPush) version_ = it->second.version;
  active_.erase(it);
}

double SenderSpec::bandwidth_for(int receiver) const {
  auto it = bandwidth_to.find(receiver);
  return it == bandwidth_to.end() ? bandwidth : it->second;
}

double CommPlan::makespan() const {
  double m = 0.0;
  for (const auto& [id, l] : load) m = std::max(m, l);
  return m;
}

std::string CommPlan::dump() const {
  std::ostringstream out;
  for (const CommAssignment& a : assignments) {
    out << "slice " << a.slice << " -> receiver " << a.receiver
        << " from sender " << a.sender << "\n";
  }
  for (const auto& [id, l] : load) {
    out << "sender " << id << " load " << l << "\n";
  }
  return out.str();
}

CommPlan plan_communication(const CommPlanInput& input) {
  std::vector<const SenderSpec*> senders;
  for (const SenderSpec& s : input.senders) senders.push_back(&s);
  std::sort(senders.begin(), senders.end(),
            [](const SenderSpec* a, const SenderSpec* b) {
              return a->id < b->id;
            });
  CommPlan plan;
  for (const SenderSpec* s : senders) plan.load[s->id] = 0.0;

  for (const SliceSpec& slice : input.slices) {
    for (int receiver : slice.receivers) {
      const SenderSpec* pick = nullptr;
      for (const SenderSpec* s : senders) {
        if (!s->holds.contains(slice.id)) continue;
        if (!pick || plan.load[s->id] < plan.load[pick->id]) pick = s;
      }
      if (!pick) {
        throw Error(ErrorCode::kUncoverable,
                    "no sender holds slice " + std::to_string(slice.id));
      }
      plan.load[pick->id] +=
          slice.size / pick->bandwidth_for(receiver) + pick->latency;
      plan.assignments.push_back({slice.id, receiver, pick->id});
    }
  }
  return plan;
}

}  // namespace stalesim
