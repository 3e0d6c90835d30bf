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

#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace hh {

namespace {

const std::set<std::string> kGlobalKeys = {"subcommand", "distribution", "bandwidth", "grid",
                                           "seed",       "threads",      "out_dir"};

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_tolerance(const std::string& key) {
  const auto dot = key.rfind('.');
  const std::string k = dot == std::string::npos ? key : key.substr(dot + 1);
  return k == "tol" || k.rfind("tol_", 0) == 0 || (k.size() > 4 && k.substr(k.size() - 4) == "_tol");
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = strip(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3)
        throw ConfigError("config line " + std::to_string(line) + ": malformed section header");
      section = strip(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line) + ": expected key = value");
    const std::string key = strip(s.substr(0, eq));
    if (key.empty() || key.find_first_of(" \t.") != std::string::npos)
      throw ConfigError("config line " + std::to_string(line) + ": bad key '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (c.entries.count(full))
      throw ConfigError("config line " + std::to_string(line) + ": duplicate key '" + full +
                        "' (first set on line " + std::to_string(c.entries[full].line) + ")");
    c.entries[full] = {strip(s.substr(eq + 1)), line};
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const ExperimentConfig saved = *this;
  entries[key] = {value, 0};
  try {
    validate();
  } catch (...) {
    *this = saved;
    throw;
  }
}

const ExperimentConfig::Entry* ExperimentConfig::find(const std::string& key) const {
  if (!subcommand.empty()) {
    auto it = entries.find(subcommand + "." + key);
    if (it != entries.end()) return &it->second;
  }
  auto it = entries.find(key);
  return it == entries.end() ? nullptr : &it->second;
}

void ExperimentConfig::fail(const std::string& key, const Entry& e, const std::string& what) const {
  const std::string where = e.line > 0 ? "config line " + std::to_string(e.line) : "option";
  throw ConfigError(where + ": key '" + key + "': " + what + ", got '" + e.value + "'");
}

bool ExperimentConfig::has(const std::string& key) const { return find(key) != nullptr; }

std::string ExperimentConfig::get(const std::string& key, const std::string& fallback) const {
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(e->value, &pos);
    if (pos != e->value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    fail(key, *e, "expected a number");
  }
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  try {
    size_t pos = 0;
    const long v = std::stol(e->value, &pos);
    if (pos != e->value.size()) throw std::invalid_argument("");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    fail(key, *e, "expected an integer");
  }
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::string v = e->value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(key, *e, "expected true or false");
}

std::vector<double> ExperimentConfig::get_list(const std::string& key,
                                               const std::vector<double>& fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::vector<double> out;
  std::stringstream ss(e->value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = strip(item);
    try {
      size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      fail(key, *e, "expected a comma-separated list of numbers");
    }
  }
  if (out.empty()) fail(key, *e, "expected a non-empty list");
  return out;
}

void ExperimentConfig::check_keys(const std::set<std::string>& allowed) const {
  for (const auto& [key, e] : entries) {
    const auto dot = key.find('.');
    std::string base = key;
    if (dot != std::string::npos) {
      const std::string sec = key.substr(0, dot);
      // Sections for other subcommands are ignored, so one file can hold
      // settings for several runs.
      if (sec != subcommand) continue;
      base = key.substr(dot + 1);
    }
    if (kGlobalKeys.count(base) || allowed.count(base)) continue;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    const std::string where = e.line > 0 ? "config line " + std::to_string(e.line) : "option";
    throw ConfigError(where + ": unknown key '" + key + "' for subcommand '" + subcommand +
                      "' (known: " + list + ")");
  }
}

void ExperimentConfig::validate() {
  auto top = [&](const std::string& k) -> const Entry* {
    auto it = entries.find(k);
    return it == entries.end() ? nullptr : &it->second;
  };
  subcommand = top("subcommand") ? top("subcommand")->value : "";
  distribution = get("distribution", "hopf_C2");
  N = get_int("bandwidth", 0);
  M = get_int("grid", 0);
  threads = get_int("threads", 1);
  out_dir = get("out_dir", "");
  if (const Entry* e = find("seed")) {
    try {
      size_t pos = 0;
      seed = std::stoull(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      fail("seed", *e, "expected a non-negative 64-bit integer");
    }
  }
  if (N < 0) fail("bandwidth", *find("bandwidth"), "expected N >= 0");
  if (threads < 1) fail("threads", *find("threads"), "expected at least one thread");
  if (M != 0 && N > 0 && M < 4 * N + 1)
    fail("grid", *find("grid"), "grid must hold at least 4N+1 = " + std::to_string(4 * N + 1) +
                                    " nodes");
  for (const auto& [key, e] : entries)
    if (is_tolerance(key)) {
      double v = 0.0;
      try {
        v = std::stod(e.value);
      } catch (const std::exception&) {
        fail(key, e, "expected a number");
      }
      if (!(v > 0.0)) fail(key, e, "tolerances must be positive");
    }
}

}  // namespace hh
