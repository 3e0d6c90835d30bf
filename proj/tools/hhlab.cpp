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

// hhlab: command-line front end over libhalfharm.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "halfharm/halfharm.h"

namespace {

int report_error(hh_status s) {
  std::fprintf(stderr, "hhlab: %s\n", hh_last_error());
  return s == HH_ERR_CONFIG || s == HH_ERR_ARGUMENT ? 2 : 3;
}

std::string key_of(std::string flag) {
  flag.erase(0, flag.find_first_not_of('-'));
  for (char& c : flag)
    if (c == '-') c = '_';
  return flag;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fputs(hh_usage(), stderr);
    return 2;
  }

  CLI::App app{"hhlab"};
  app.set_help_flag();
  app.allow_extras();
  std::string subcommand, config_path, out_dir, seed, threads;
  std::vector<std::string> sets;
  bool help = false;
  app.add_option("subcommand", subcommand);
  app.add_option("--config", config_path);
  app.add_option("--out-dir", out_dir);
  app.add_option("--seed", seed);
  app.add_option("--threads", threads);
  app.add_option("--set", sets)->allow_extra_args(false);
  app.add_flag("-h,--help", help);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "hhlab: %s\n%s", e.what(), hh_usage());
    return 2;
  }
  if (help) {
    std::fputs(hh_usage(), stdout);
    return 0;
  }

  // Remaining --key value and --key=value pairs become config entries.
  const std::vector<std::string> extras = app.remaining();
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0) {
      std::fprintf(stderr, "hhlab: unexpected argument '%s'\n%s", a.c_str(), hh_usage());
      return 2;
    }
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      sets.push_back(key_of(a.substr(0, eq)) + "=" + a.substr(eq + 1));
    } else if (i + 1 < extras.size()) {
      sets.push_back(key_of(a) + "=" + extras[++i]);
    } else {
      std::fprintf(stderr, "hhlab: flag '%s' needs a value\n", a.c_str());
      return 2;
    }
  }

  hh_config* config = nullptr;
  hh_status s = config_path.empty() ? (config = hh_config_new()) ? HH_OK : HH_ERR_INTERNAL
                                    : hh_config_load(config_path.c_str(), &config);
  if (s != HH_OK) return report_error(s);

  if (const char* env = std::getenv("HHLAB_OUT_DIR"); env && *env) out_dir = env;
  std::vector<std::pair<std::string, std::string>> entries;
  if (!subcommand.empty()) entries.emplace_back("subcommand", subcommand);
  if (!out_dir.empty()) entries.emplace_back("out_dir", out_dir);
  if (!seed.empty()) entries.emplace_back("seed", seed);
  if (!threads.empty()) entries.emplace_back("threads", threads);
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "hhlab: --set expects key=value, got '%s'\n", kv.c_str());
      hh_config_free(config);
      return 2;
    }
    entries.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [k, v] : entries) {
    if ((s = hh_config_set(config, k.c_str(), v.c_str())) != HH_OK) {
      hh_config_free(config);
      return report_error(s);
    }
  }

  const char* dir = nullptr;
  const std::string target = hh_config_get(config, "out_dir", &dir) == HH_OK ? dir : "";
  hh_report* report = nullptr;
  s = hh_run(config, &report);
  hh_config_free(config);
  if (s != HH_OK) return report_error(s);

  std::fputs(hh_report_json(report), stdout);
  std::fputc('\n', stdout);
  if (!target.empty() && (s = hh_report_write(report, target.c_str())) != HH_OK) {
    hh_report_free(report);
    return report_error(s);
  }
  const int code = hh_report_passed(report) ? 0 : 1;
  hh_report_free(report);
  return code;
}
