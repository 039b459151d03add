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

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cxlmu/adaptive/runtime.hpp"
#include "cxlmu/analysis/rewrite.hpp"
#include "cxlmu/driver/config.hpp"
#include "cxlmu/fabric/topology.hpp"
#include "cxlmu/host/report.hpp"
#include "cxlmu/ir/memory.hpp"

namespace cxlmu::driver {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitOracle = 3,
  kExitSim = 4,
};

struct Prepared {
  ir::Program program;
  ir::MemoryImage memory;
  fabric::Topology topology;  // finalized, program regions adopted
  std::string digest;
};

/// 64-bit FNV-1a over the printed program and memory image, as 16 hex digits.
std::string workload_digest(const ir::Program& p, const ir::MemoryImage& mem);

/// Builds the program, image and topology. Input problems throw ConfigError.
Prepared prepare(const RunConfig& cfg);

struct RunResult {
  std::string mode;
  std::string digest;
  std::vector<host::SimReport> reports;           // one per round; one outside adaptive mode
  std::optional<analysis::OffloadedProgram> plan;  // the last program run, when offloading
  std::optional<adaptive::AdaptiveRun> adaptive;

  const host::SimReport& final_report() const { return reports.back(); }
};

/// Runs the pipeline without touching the filesystem beyond input files.
RunResult execute(const RunConfig& cfg);

std::string summary_text(const RunResult& r);

/// Runs and writes the report files under cfg.output. Returns an ExitCode.
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct SweepRequest {
  std::string param;                // a numeric key, or an unambiguous last component
  std::vector<std::string> values;  // in output order
  std::vector<std::string> modes;   // empty: the configured mode
};

inline constexpr const char* kSweepHeader = "param,mode,total_cycles,stall_cycles,mean_utilization";

/// Resolves `hop_latency` style names to a full key. Throws ConfigError.
std::string resolve_sweep_param(std::string_view param);

/// One row per value per mode. Runs execute concurrently; rows keep input order.
std::string sweep_csv(const ConfigStore& base, const SweepRequest& req);

/// Writes the CSV to `path` (and echoes it to `out`). Returns an ExitCode.
int cmd_sweep(const ConfigStore& base, const SweepRequest& req, const std::string& path,
              std::ostream& out, std::ostream& err);

class CompareError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws CompareError when the workload digests differ.
std::string compare_reports(const host::SimReport& a, const host::SimReport& b);

int cmd_compare(const std::string& path_a, const std::string& path_b, std::ostream& out,
                std::ostream& err);

}  // namespace cxlmu::driver
