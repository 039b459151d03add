/*
 * Copyright 2026 The cxlmu Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cxlmu/driver/commands.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include "cxlmu/analysis/dump.hpp"
#include "cxlmu/host/simulate.hpp"
#include "cxlmu/ir/parser.hpp"
#include "cxlmu/workloads/generate.hpp"
#include "cxlmu/workloads/trace_file.hpp"

namespace cxlmu::driver {

namespace {

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(std::string("cannot read ") + what + " " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

ir::Program checked(ir::ParseResult r, const std::string& origin) {
  if (!r.ok()) {
    const auto& d = r.diagnostics.front();
    throw ConfigError(origin + ":" + std::to_string(d.line) + ": " + d.message);
  }
  return std::move(r.program);
}

bool is_builtin(const std::string& name) {
  return name == "direct" || name == "line" || name == "two-endpoint";
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

host::SimOptions sim_options(const RunConfig& cfg, const std::string& digest) {
  host::SimOptions o;
  o.verify = cfg.verify;
  o.step_budget = cfg.step_budget;
  o.message_log = cfg.message_log;
  o.cycle_trace = cfg.cycle_trace;
  o.mode = cfg.mode;
  o.workload_digest = digest;
  o.seed = cfg.seed;
  return o;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace

std::string workload_digest(const ir::Program& p, const ir::MemoryImage& mem) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  feed(ir::print_program(p));
  feed("\n--\n");
  feed(ir::print_memory_image(mem));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

Prepared prepare(const RunConfig& cfg) {
  Prepared out;
  if (!cfg.program_path.empty()) {
    out.program = checked(ir::parse_program(read_file(cfg.program_path, "program")), cfg.program_path);
    if (!cfg.memory_path.empty()) {
      try {
        out.memory = ir::parse_memory_image(read_file(cfg.memory_path, "memory image"), out.program.regions);
      } catch (const ir::MemoryError& e) {
        throw ConfigError(cfg.memory_path + ": " + e.what());
      }
    } else {
      out.memory = ir::MemoryImage(out.program.regions);
    }
  } else if (!cfg.trace_path.empty()) {
    out.program = checked(workloads::load_trace_file(cfg.trace_path), cfg.trace_path);
    out.memory = ir::MemoryImage(out.program.regions);
  } else {
    try {
      auto w = workloads::generate(cfg.workload);
      out.program = std::move(w.program);
      out.memory = std::move(w.memory);
    } catch (const workloads::WorkloadError& e) {
      throw ConfigError(std::string("workload: ") + e.what());
    }
  }

  try {
    if (is_builtin(cfg.topology)) {
      out.topology = fabric::builtin_topology(
          cfg.topology, {cfg.host_switch_latency, cfg.switch_endpoint_latency, cfg.bandwidth});
    } else {
      out.topology = fabric::parse_topology(read_file(cfg.topology, "topology"));
      if (cfg.topology_latency > 0) out.topology.set_all_latencies(cfg.topology_latency);
    }
    out.topology.adopt_regions(out.program.regions);
    out.topology.finalize();
  } catch (const fabric::TopologyError& e) {
    throw ConfigError(std::string("topology: ") + e.what());
  }
  out.digest = workload_digest(out.program, out.memory);
  return out;
}

RunResult execute(const RunConfig& cfg) {
  const Prepared in = prepare(cfg);
  RunResult r;
  r.mode = cfg.mode;
  r.digest = in.digest;
  const auto sim = sim_options(cfg, in.digest);
  if (cfg.mode == "baseline") {
    r.reports.push_back(host::simulate(in.program, in.memory, in.topology, cfg.cost, cfg.core, sim));
  } else if (cfg.mode == "offload") {
    analysis::OffloadOptions oo;
    oo.slicing = cfg.slicing;
    oo.cost = cfg.cost;
    r.plan = analysis::plan_offload(in.program, in.topology, oo);
    r.reports.push_back(host::simulate(*r.plan, in.memory, in.topology, cfg.cost, cfg.core, sim));
  } else {
    adaptive::AdaptiveOptions ao;
    ao.rounds = cfg.rounds;
    ao.slicing = cfg.slicing;
    ao.alpha = cfg.alpha;
    auto run = adaptive::run_adaptive(in.program, in.memory, in.topology, cfg.cost, cfg.cost, cfg.core,
                                      ao, sim);
    r.reports = run.reports;
    if (!run.programs.empty()) r.plan = run.programs.back();
    r.adaptive = std::move(run);
  }
  return r;
}

std::string summary_text(const RunResult& r) {
  const auto& rep = r.final_report();
  std::ostringstream s;
  s << "mode: " << r.mode << '\n';
  s << "workload digest: " << r.digest << '\n';
  s << "status: " << rep.status;
  if (!rep.message.empty()) s << " (" << rep.message << ")";
  s << '\n';
  s << "oracle checked: " << (rep.oracle_checked ? "yes" : "no") << '\n';
  s << "total cycles: " << rep.total_cycles << '\n';
  s << "instructions retired: " << rep.instructions_retired << '\n';
  s << "stall cycles: " << rep.stalls.total() << '\n';
  s << "  l1_miss " << rep.stalls.l1_miss << '\n';
  s << "  mshr_full " << rep.stalls.mshr_full << '\n';
  s << "  rob_full " << rep.stalls.rob_full << '\n';
  s << "  awaiting_mailbox " << rep.stalls.awaiting_mailbox << '\n';
  s << "l1 hits " << rep.l1_hits << ", misses " << rep.l1_misses << '\n';
  s << "max occupancy: rob " << rep.max_rob_occupancy << ", mshr " << rep.max_mshr_occupancy << '\n';
  if (r.adaptive) {
    s << "rounds:\n";
    for (std::size_t i = 0; i < r.reports.size(); ++i)
      s << "  " << i + 1 << " total_cycles " << r.reports[i].total_cycles << " stall_cycles "
        << r.reports[i].stalls.total() << '\n';
  }
  std::map<ir::SliceId, std::pair<std::string, double>> slices;
  for (const auto& rec : rep.slices) slices.try_emplace(rec.slice, rec.site, rec.est_window);
  s << "slices: " << slices.size() << '\n';
  if (!slices.empty()) {
    s << "  slice site est_window window utilization executions\n";
    for (const auto& [id, info] : slices) {
      s << "  " << id << ' ' << info.first << ' ' << fmt("%.1f", info.second) << ' ';
      try {
        const auto m = host::measure_window(rep, id);
        s << fmt("%.1f", m.window) << ' ' << fmt("%.4f", m.utilization) << ' ' << m.executions;
      } catch (const std::runtime_error&) {
        s << "- - 0";
      }
      s << '\n';
    }
    s << "mean utilization: " << fmt("%.4f", host::mean_utilization(rep)) << '\n';
  }
  return s.str();
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const RunResult r = execute(cfg);
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output);
    fs::create_directories(dir);
    const auto& rep = r.final_report();
    write_file(dir / "report.json", host::to_json(rep));
    if (r.adaptive)
      for (std::size_t i = 0; i < r.reports.size(); ++i)
        write_file(dir / ("report-round-" + std::to_string(i + 1) + ".json"), host::to_json(r.reports[i]));
    if (r.plan) {
      write_file(dir / "analysis.txt", analysis::analysis_text(*r.plan));
      write_file(dir / "analysis.json", analysis::analysis_json(*r.plan));
    }
    if (r.adaptive) {
      write_file(dir / "profile.json", adaptive::profile_json(r.adaptive->profile));
      std::vector<std::string> lines;
      for (const auto& d : r.adaptive->decisions) lines.push_back(adaptive::format_decision(d));
      write_file(dir / "adaptation.log", join_lines(lines));
    }
    if (cfg.message_log) write_file(dir / "messages.log", join_lines(rep.message_log));
    if (cfg.cycle_trace) write_file(dir / "cycle_trace.txt", join_lines(rep.cycle_trace));
    const auto summary = summary_text(r);
    write_file(dir / "summary.txt", summary);
    out << summary;
    if (rep.status != "ok") {
      err << "error: program ended with " << rep.status << ": " << rep.message << '\n';
      return kExitSim;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const host::OracleMismatch& e) {
    err << "oracle mismatch: " << e.what() << '\n';
    return kExitOracle;
  } catch (const host::SimError& e) {
    err << "simulation error: " << e.what() << '\n';
    return kExitSim;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::string resolve_sweep_param(std::string_view param) {
  if (const auto* k = find_key(param)) {
    if (!is_numeric_key(k->name)) throw ConfigError("sweep parameter '" + k->name + "' is not numeric");
    return k->name;
  }
  std::vector<const KeySpec*> hits;
  for (const auto& k : config_keys()) {
    const auto dot = k.name.rfind('.');
    if (dot != std::string::npos && std::string_view(k.name).substr(dot + 1) == param) hits.push_back(&k);
  }
  // A key that the other candidates derive from stands for all of them.
  for (const auto* h : hits) {
    bool root = true;
    for (const auto* o : hits)
      if (o != h && o->derived_from != h->name) root = false;
    if (root) {
      if (!is_numeric_key(h->name)) throw ConfigError("sweep parameter '" + h->name + "' is not numeric");
      return h->name;
    }
  }
  if (hits.empty()) throw ConfigError("unknown config key '" + std::string(param) + "'");
  throw ConfigError("ambiguous sweep parameter '" + std::string(param) + "'");
}

std::string sweep_csv(const ConfigStore& base, const SweepRequest& req) {
  const auto key = resolve_sweep_param(req.param);
  std::vector<std::string> modes = req.modes;
  if (modes.empty()) modes.push_back(base.get("mode"));

  struct Job {
    std::string value;
    std::string mode;
    RunConfig cfg;
  };
  std::vector<Job> jobs;
  for (const auto& v : req.values)
    for (const auto& m : modes) {
      ConfigStore s = base;
      s.set(key, v);
      s.set("mode", m);
      RunConfig cfg = resolve(s);
      cfg.message_log = false;
      cfg.cycle_trace = false;
      jobs.push_back({v, m, std::move(cfg)});
    }

  std::vector<std::future<host::SimReport>> futures;
  futures.reserve(jobs.size());
  for (const auto& j : jobs)
    futures.push_back(std::async(std::launch::async, [&j] { return execute(j.cfg).final_report(); }));

  std::ostringstream csv;
  csv << kSweepHeader << '\n';
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto rep = futures[i].get();
    csv << jobs[i].value << ',' << jobs[i].mode << ',' << rep.total_cycles << ',' << rep.stalls.total()
        << ',' << fmt("%.6f", host::mean_utilization(rep)) << '\n';
  }
  return csv.str();
}

int cmd_sweep(const ConfigStore& base, const SweepRequest& req, const std::string& path,
              std::ostream& out, std::ostream& err) {
  try {
    const auto csv = sweep_csv(base, req);
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    write_file(p, csv);
    out << csv;
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const host::OracleMismatch& e) {
    err << "oracle mismatch: " << e.what() << '\n';
    return kExitOracle;
  } catch (const host::SimError& e) {
    err << "simulation error: " << e.what() << '\n';
    return kExitSim;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::string compare_reports(const host::SimReport& a, const host::SimReport& b) {
  if (a.workload_digest != b.workload_digest)
    throw CompareError("workload digests differ: " + a.workload_digest + " vs " + b.workload_digest);
  std::ostringstream s;
  s << "workload digest: " << a.workload_digest << '\n';
  s << "modes: " << a.mode << " vs " << b.mode << '\n';
  s << "total cycles: " << a.total_cycles << " vs " << b.total_cycles << '\n';
  s << "cycle ratio (b/a): ";
  if (a.total_cycles == 0)
    s << "n/a";
  else
    s << fmt("%.3f", static_cast<double>(b.total_cycles) / static_cast<double>(a.total_cycles));
  s << '\n';
  auto row = [&](const char* name, std::uint64_t x, std::uint64_t y) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-17s %12" PRIu64 " %12" PRIu64 " %+13" PRId64 "\n", name, x, y,
                  static_cast<std::int64_t>(y) - static_cast<std::int64_t>(x));
    s << buf;
  };
  s << "stall cycles:          a            b         delta\n";
  row("l1_miss", a.stalls.l1_miss, b.stalls.l1_miss);
  row("mshr_full", a.stalls.mshr_full, b.stalls.mshr_full);
  row("rob_full", a.stalls.rob_full, b.stalls.rob_full);
  row("awaiting_mailbox", a.stalls.awaiting_mailbox, b.stalls.awaiting_mailbox);
  row("total", a.stalls.total(), b.stalls.total());

  s << "slice windows:\n";
  s << "  report slice site est_window window utilization executions\n";
  std::size_t rows = 0;
  auto table = [&](const char* tag, const host::SimReport& r) {
    std::map<ir::SliceId, std::pair<std::string, double>> seen;
    for (const auto& rec : r.slices) seen.try_emplace(rec.slice, rec.site, rec.est_window);
    for (const auto& [id, info] : seen) {
      ++rows;
      s << "  " << tag << ' ' << id << ' ' << info.first << ' ' << fmt("%.1f", info.second) << ' ';
      try {
        const auto m = host::measure_window(r, id);
        s << fmt("%.1f", m.window) << ' ' << fmt("%.4f", m.utilization) << ' ' << m.executions << '\n';
      } catch (const std::runtime_error&) {
        s << "- - 0\n";
      }
    }
  };
  table("a", a);
  table("b", b);
  if (rows == 0) s << "  (none)\n";
  return s.str();
}

int cmd_compare(const std::string& path_a, const std::string& path_b, std::ostream& out,
                std::ostream& err) {
  auto load = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read report " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      return host::report_from_json(ss.str());
    } catch (const std::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
  };
  try {
    const auto a = load(path_a);
    const auto b = load(path_b);
    out << compare_reports(a, b);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CompareError& e) {
    err << "refusing to compare: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace cxlmu::driver
