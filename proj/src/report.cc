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

#include "stalesim/report.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "stalesim/common.h"

namespace stalesim {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void apply(TraceReport& r, const json& rec,
           std::unordered_map<int64_t, double>& consumed_at,
           std::unordered_map<uint64_t, double>& issued_at) {
  const std::string kind = rec.at("kind").get<std::string>();
  const double t = rec.at("t").get<double>();
  r.breakdown.duration = std::max(r.breakdown.duration, t);
  if (kind == "snapshot") {
    if (!rec.at("accepted").get<bool>()) return;
    for (const json& l : rec.at("loads")) {
      LoadSample s;
      s.t = t;
      s.inst = l.at(0).get<int>();
      s.run = l.at(1).get<int64_t>();
      s.wait = l.at(2).get<int64_t>();
      s.complete = l.at(3).get<int64_t>();
      s.kv = l.at(4).get<double>();
      s.version = l.at(5).get<int64_t>();
      r.loads.push_back(s);
    }
  } else if (kind == "consume") {
    StepLengths st;
    st.step = rec.at("step").get<int>();
    st.v_buf = rec.at("v_buf").get<int64_t>();
    auto& hist = r.staleness[st.v_buf];
    double total = 0.0;
    for (const json& m : rec.at("members")) {
      const int64_t v = m.at(1).get<int64_t>();
      const int64_t len = m.at(2).get<int64_t>();
      ++hist[st.v_buf - v];
      ++st.trajectories;
      st.max_len = std::max(st.max_len, len);
      total += static_cast<double>(len);
    }
    if (st.trajectories > 0) st.mean_len = total / st.trajectories;
    r.steps.push_back(st);
    consumed_at[st.step] = t;
  } else if (kind == "train_done") {
    auto it = consumed_at.find(rec.at("step").get<int64_t>());
    if (it != consumed_at.end()) r.breakdown.train += t - it->second;
  } else if (kind == "ps") {
    const double d = rec.at("end").get<double>() - rec.at("start").get<double>();
    if (rec.at("op").get<std::string>() == "push") {
      r.breakdown.push += d;
    } else {
      r.breakdown.pull += d;
    }
  } else if (kind == "command") {
    issued_at[rec.at("id").get<uint64_t>()] = t;
  } else if (kind == "effect") {
    auto it = issued_at.find(rec.at("id").get<uint64_t>());
    if (it != issued_at.end()) {
      r.breakdown.commands += t - it->second;
      issued_at.erase(it);
    }
  } else if (kind == "tick") {
    r.breakdown.decode += rec.at("dt").get<double>();
  }
}

}  // namespace

int64_t TraceReport::max_staleness() const {
  int64_t m = -1;
  for (const auto& [v_buf, hist] : staleness) {
    if (!hist.empty()) m = std::max(m, hist.rbegin()->first);
  }
  return m;
}

std::string TraceReport::load_csv() const {
  std::ostringstream out;
  out << "t,inst,run,wait,complete,kv,version\n";
  for (const LoadSample& s : loads) {
    out << num(s.t) << ',' << s.inst << ',' << s.run << ',' << s.wait << ','
        << s.complete << ',' << num(s.kv) << ',' << s.version << '\n';
  }
  return out.str();
}

std::string TraceReport::staleness_csv() const {
  std::ostringstream out;
  const int64_t top = max_staleness();
  out << "v_buf";
  for (int64_t s = 0; s <= top; ++s) out << ",s" << s;
  out << '\n';
  for (const auto& [v_buf, hist] : staleness) {
    out << v_buf;
    for (int64_t s = 0; s <= top; ++s) {
      auto it = hist.find(s);
      out << ',' << (it == hist.end() ? 0 : it->second);
    }
    out << '\n';
  }
  return out.str();
}

std::string TraceReport::lengths_csv() const {
  std::ostringstream out;
  out << "step,v_buf,trajectories,max_len,mean_len\n";
  for (const StepLengths& s : steps) {
    out << s.step << ',' << s.v_buf << ',' << s.trajectories << ','
        << s.max_len << ',' << num(s.mean_len) << '\n';
  }
  return out.str();
}

std::string TraceReport::breakdown_csv() const {
  const Breakdown& b = breakdown;
  const double busy = b.train + b.push + b.pull + b.commands + b.decode;
  std::ostringstream out;
  out << "activity,seconds,share\n";
  auto row = [&](const char* name, double v) {
    out << name << ',' << num(v) << ',' << num(busy > 0 ? v / busy : 0.0)
        << '\n';
  };
  row("train", b.train);
  row("push", b.push);
  row("pull", b.pull);
  row("commands", b.commands);
  row("decode", b.decode);
  out << "duration," << num(b.duration) << ",\n";
  return out.str();
}

TraceReport build_report(const std::vector<std::string>& lines) {
  TraceReport r;
  std::unordered_map<int64_t, double> consumed_at;
  std::unordered_map<uint64_t, double> issued_at;
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      if (!rec.is_object()) throw std::invalid_argument("not an object");
      apply(r, rec, consumed_at, issued_at);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kMalformedTrace,
                  "line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return r;
}

TraceReport load_report(const std::string& trace_path) {
  std::ifstream in(trace_path);
  if (!in) {
    throw Error(ErrorCode::kMalformedTrace, "cannot read " + trace_path);
  }
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return build_report(lines);
}

void write_report(const TraceReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& body) {
    std::ofstream out(std::filesystem::path(dir) / name);
    out << body;
  };
  put("loads.csv", report.load_csv());
  put("staleness.csv", report.staleness_csv());
  put("lengths.csv", report.lengths_csv());
  put("breakdown.csv", report.breakdown_csv());
}

}  // namespace stalesim
