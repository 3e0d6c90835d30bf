// Copyright 2026 The halfharm Authors
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

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "spectral.hpp"

namespace hh {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

// One checked quantity group.  `asserted` is false for values that are
// reported only; they never fail a run.
struct Diagnostic {
  std::string name;
  bool passed = true;
  bool asserted = true;
  json values = json::object();
  double seconds = 0.0;
  double time_limit = 0.0;  // 0: no limit
};

// CSV series with a header row; cells are preformatted.
struct Series {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  void add(const std::vector<double>& row);
};

struct RunReport {
  ExperimentConfig config;
  std::vector<Diagnostic> diagnostics;
  std::map<std::string, Series> series;
  json outputs = json::object();  // subcommand payload (solutions, reports)
  double wall_seconds = 0.0;

  bool passed() const;
  // Everything but timing; identical configs and seeds give identical bytes.
  json payload() const;
  json to_json() const;
};

RunReport run(const ExperimentConfig& config);
std::string usage();

// Writes <out_dir>/<kind>.csv.  Throws std::invalid_argument naming the
// available series when `kind` is missing.
std::string emit_plotdata(const RunReport& report, const std::string& kind,
                          const std::string& out_dir);
std::string series_csv(const RunReport& report, const std::string& kind);
// report.json plus every series.
std::vector<std::string> write_outputs(const RunReport& report, const std::string& out_dir);

// Field files: {"rows", "cols", "N", "modes": [[[re, im] for n = 0..N] per component]}.
json field_to_json(const Field& f);
Field field_from_json(const json& j);
Field load_field(const std::string& path);

std::string format_double(double v);

// Runs fn(i) for i < n on up to `threads` workers; results must be written
// per index so the outcome does not depend on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// Suites shared by `verify` and the acceptance binary.
std::vector<Diagnostic> exhalf_suite(const ExperimentConfig& c, RunReport& report);
std::vector<Diagnostic> acceptance_suite(const ExperimentConfig& c, RunReport& report);

}  // namespace hh
