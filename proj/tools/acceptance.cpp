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

// Runs the acceptance criteria through libhalfharm and prints one line per
// criterion.  Exit status is 0 iff every asserted criterion passes.

#include <cstdio>
#include <string>

#include "halfharm/halfharm.h"

int main(int argc, char** argv) {
  hh_config* config = hh_config_new();
  if (!config) return 3;
  hh_config_set(config, "subcommand", "verify");
  hh_config_set(config, "suite", "acceptance");
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const char* key = flag == "--out-dir" ? "out_dir" : flag == "--seed" ? "seed" : nullptr;
    if (!key || hh_config_set(config, key, argv[i + 1]) != HH_OK) {
      std::fprintf(stderr, "usage: hh_acceptance [--out-dir DIR] [--seed N]\n%s\n", hh_last_error());
      hh_config_free(config);
      return 2;
    }
  }

  hh_report* report = nullptr;
  const hh_status s = hh_run(config, &report);
  hh_config_free(config);
  if (s != HH_OK) {
    std::fprintf(stderr, "hh_acceptance: %s\n", hh_last_error());
    return 3;
  }

  const int n = hh_report_diagnostic_count(report);
  for (int i = 0; i < n; ++i) {
    const char* name = nullptr;
    const char* values = nullptr;
    int passed = 0, asserted = 0;
    double seconds = 0.0;
    hh_report_diagnostic(report, i, &name, &passed, &asserted, &seconds, &values);
    std::printf("%s %-34s %8.3f s  %s\n", !asserted ? "INFO" : passed ? "PASS" : "FAIL", name,
                seconds, values);
  }
  const int ok = hh_report_passed(report);
  std::printf("%s\n", ok ? "all criteria passed" : "some criteria failed");
  hh_report_free(report);
  return ok ? 0 : 1;
}
