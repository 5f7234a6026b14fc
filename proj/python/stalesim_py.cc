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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stalesim/compare.h"
#include "stalesim/config.h"
#include "stalesim/cost_model.h"
#include "stalesim/parameter_server.h"
#include "stalesim/report.h"
#include "stalesim/sim_engine.h"
#include "stalesim/staleness_manager.h"

namespace py = pybind11;
using namespace stalesim;

namespace {

py::dict occupancy_dict(const Occupancy& o) {
  py::dict d;
  d["key"] = o.key;
  d["buffer"] = o.buffer;
  d["aborted"] = o.aborted;
  return d;
}

py::dict batch_dict(const ConsumedBatch& b) {
  py::list entries;
  for (const BufferEntry& e : b.entries) {
    py::list members;
    for (const Member& m : e.members) {
      members.append(py::make_tuple(m.id, m.version, m.complete));
    }
    py::dict entry;
    entry["key"] = e.key;
    entry["version"] = e.version;
    entry["members"] = members;
    entries.append(entry);
  }
  py::dict d;
  d["v_buf"] = b.v_buf;
  d["entries"] = entries;
  d["aborted_groups"] = b.aborted_groups;
  d["aborted_trajs"] = b.aborted_trajs;
  return d;
}

}  // namespace

PYBIND11_MODULE(_stalesim, m) {
  m.doc() = "Staleness-bounded rollout control plane and simulator";

  static py::exception<Error> error(m, "StalesimError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object type = error;
      py::object exc = type(e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<LedgerConfig>(m, "LedgerConfig")
      .def(py::init([](int eta, int batch_size, int group_size,
                       const std::string& redundancy, double ratio) {
             LedgerConfig c;
             c.eta = eta;
             c.batch_size = batch_size;
             c.group_size = group_size;
             c.redundancy = redundancy_from_string(redundancy);
             c.redundant_ratio = ratio;
             c.validate();
             return c;
           }),
           py::arg("eta"), py::arg("batch_size"), py::arg("group_size"),
           py::arg("redundancy") = "none", py::arg("ratio") = 0.0)
      .def_readonly("eta", &LedgerConfig::eta)
      .def_readonly("batch_size", &LedgerConfig::batch_size)
      .def_readonly("group_size", &LedgerConfig::group_size)
      .def_property_readonly("buffer_capacity", &LedgerConfig::buffer_capacity)
      .def_property_readonly("members_per_group",
                             &LedgerConfig::members_per_group);

  py::class_<BufferLedger>(m, "BufferLedger")
      .def(py::init<const LedgerConfig&>())
      .def_property_readonly("consumed_upto", &BufferLedger::consumed_upto)
      .def("verify_assignable", &BufferLedger::verify_assignable)
      .def("verify_member_assignable", &BufferLedger::verify_member_assignable)
      .def("reserve", &BufferLedger::reserve, py::arg("key"),
           py::arg("version"), py::arg("members"))
      .def("assign_member_version", &BufferLedger::assign_member_version)
      .def("admit", &BufferLedger::admit)
      .def("mark_complete",
           [](BufferLedger& l, TrajId t) -> py::object {
             auto occ = l.mark_complete(t);
             if (!occ) return py::none();
             return occupancy_dict(*occ);
           })
      .def("delete_and_relocate", &BufferLedger::delete_and_relocate)
      .def("consume", [](BufferLedger& l) { return batch_dict(l.consume()); })
      .def("abort", &BufferLedger::abort)
      .def("state_of",
           [](const BufferLedger& l, Version v) {
             return std::string(to_string(l.state_of(v)));
           })
      .def("locate",
           [](const BufferLedger& l, GroupKey key) -> py::object {
             auto ref = l.locate(key);
             if (!ref) return py::none();
             return py::make_tuple(ref->buffer, ref->slot);
           })
      .def("tracks", &BufferLedger::tracks)
      .def("dump", &BufferLedger::dump);

  py::class_<CostCoefficients>(m, "CostCoefficients")
      .def(py::init<>())
      .def_static("reference", &CostCoefficients::reference)
      .def_readwrite("k1", &CostCoefficients::k1)
      .def_readwrite("k2", &CostCoefficients::k2)
      .def_readwrite("k3", &CostCoefficients::k3)
      .def_readwrite("k4", &CostCoefficients::k4)
      .def_readwrite("k5", &CostCoefficients::k5)
      .def_readwrite("M", &CostCoefficients::M)
      .def("crossover", &CostCoefficients::crossover)
      .def("__repr__", [](const CostCoefficients& c) {
        return coefficients_to_json(c);
      });

  m.def("decode_step_latency", &decode_step_latency, py::arg("coefficients"),
        py::arg("kv_cache"), py::arg("n_running"));
  m.def(
      "estimate_throughput",
      [](const CostCoefficients& c, double kv, int64_t run, int64_t wait) {
        return estimate_throughput(c, InstanceLoad{kv, run, wait});
      },
      py::arg("coefficients"), py::arg("kv_cache"), py::arg("n_running"),
      py::arg("n_waiting") = 0);
  m.def(
      "marginal_gain",
      [](const CostCoefficients& c, double kv, int64_t run, int64_t wait,
         double len) {
        return marginal_gain(c, InstanceLoad{kv, run, wait}, len);
      },
      py::arg("coefficients"), py::arg("kv_cache"), py::arg("n_running"),
      py::arg("n_waiting"), py::arg("traj_len"));
  m.def("ideal_gain", &ideal_gain);

  m.def(
      "generate_profile",
      [](const CostCoefficients& c, int count, double noise, uint64_t seed) {
        std::vector<std::tuple<double, int64_t, double>> out;
        for (const ProfileSample& s : generate_profile(c, count, noise, seed)) {
          out.emplace_back(s.kv_cache, s.n_running, s.latency);
        }
        return out;
      },
      py::arg("coefficients"), py::arg("count"), py::arg("noise") = 0.0,
      py::arg("seed") = 1);
  m.def(
      "fit_coefficients",
      [](const std::vector<std::tuple<double, int64_t, double>>& rows) {
        std::vector<ProfileSample> samples;
        for (const auto& [kv, n, lat] : rows) samples.push_back({kv, n, lat});
        const FitResult r = fit_coefficients(samples);
        py::dict d;
        d["coefficients"] = r.coefficients;
        d["rss"] = r.rss;
        d["max_rel_residual"] = r.max_rel_residual;
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("samples"));

  m.def(
      "plan_communication",
      [](const std::vector<std::tuple<int, double, std::vector<int>>>& slices,
         const std::vector<std::tuple<int, std::set<int>, double, double>>&
             senders) {
        CommPlanInput in;
        for (const auto& [id, size, receivers] : slices) {
          in.slices.push_back(SliceSpec{id, size, receivers});
        }
        for (const auto& [id, holds, bandwidth, latency] : senders) {
          SenderSpec s;
          s.id = id;
          s.holds = holds;
          s.bandwidth = bandwidth;
          s.latency = latency;
          in.senders.push_back(s);
        }
        const CommPlan plan = plan_communication(in);
        std::vector<std::tuple<int, int, int>> assignments;
        for (const CommAssignment& a : plan.assignments) {
          assignments.emplace_back(a.slice, a.receiver, a.sender);
        }
        py::dict d;
        d["assignments"] = assignments;
        d["load"] = plan.load;
        d["makespan"] = plan.makespan();
        return d;
      },
      py::arg("slices"), py::arg("senders"),
      "slices: (id, size, receivers); senders: (id, holds, bandwidth, "
      "latency).");

  m.def(
      "load_config",
      [](const std::string& path) { return config_to_json(load_config(path)); },
      "Validated config as canonical JSON.");
  m.def(
      "run_simulation",
      [](const std::string& config_json, uint64_t seed) {
        const ExperimentConfig cfg = config_from_json(config_json);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_simulation(cfg, seed);
        }
        py::dict d;
        d["summary"] = r.summary.to_json();
        d["trace"] = r.trace;
        d["ledger"] = r.ledger_dump;
        return d;
      },
      py::arg("config_json"), py::arg("seed") = 1);
  m.def(
      "compare_suites",
      [](const std::string& config_json, const std::vector<uint64_t>& seeds) {
        const ExperimentConfig cfg = config_from_json(config_json);
        ComparisonReport r;
        {
          py::gil_scoped_release release;
          r = compare_suites(cfg, seeds);
        }
        return r.csv();
      },
      py::arg("config_json"), py::arg("seeds"));
  m.def("report", [](const std::vector<std::string>& trace) {
    const TraceReport r = build_report(trace);
    py::dict d;
    d["loads"] = r.load_csv();
    d["staleness"] = r.staleness_csv();
    d["lengths"] = r.lengths_csv();
    d["breakdown"] = r.breakdown_csv();
    return d;
  });
}
