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

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hh {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Plain-text configuration:
//
//   # comment
//   subcommand = commutators
//   seed = 7
//   [commutators]
//   decompose = T
//
// Keys inside a section are stored as "section.key".  A lookup of key k for
// subcommand s tries "s.k" first, then "k".
struct ExperimentConfig {
  std::string subcommand;
  std::string distribution = "hopf_C2";
  int N = 0;  // bandwidth, 0 lets the subcommand choose
  int M = 0;  // grid nodes, 0 picks the smallest admissible grid
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir;

  struct Entry {
    std::string value;
    int line = 0;  // 0 for values set from the command line
  };
  std::map<std::string, Entry> entries;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);

  // Sets a key and re-validates the typed fields.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  // Throws ConfigError naming the first key outside `allowed` (global keys
  // are always allowed).
  void check_keys(const std::set<std::string>& allowed) const;
  // Re-derives the typed fields from entries and checks M >= 4N+1 and
  // positive tolerances.
  void validate();

 private:
  const Entry* find(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const Entry& e, const std::string& what) const;
};

}  // namespace hh
