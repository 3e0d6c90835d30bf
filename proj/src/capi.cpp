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

#include "halfharm/halfharm.h"

#include <filesystem>
#include <new>
#include <string>

#include "distributions.hpp"
#include "halfharmonic.hpp"
#include "runner.hpp"

struct hh_config {
  hh::ExperimentConfig config;
  std::string scratch;
};

struct hh_report {
  hh::RunReport report;
  std::string json, payload, series_names;
  std::vector<std::string> diag_values;
  std::map<std::string, std::string> csv;
};

struct hh_field {
  hh::Field field;
};

namespace {

thread_local std::string g_error;

hh_status fail(hh_status s, const std::string& msg) {
  g_error = msg;
  return s;
}

// Maps exceptions from the core onto status codes.
template <class Fn>
hh_status guard(Fn&& fn) {
  try {
    g_error.clear();
    return fn();
  } catch (const hh::ConfigError& e) {
    return fail(HH_ERR_CONFIG, e.what());
  } catch (const std::domain_error& e) {
    return fail(HH_ERR_DOMAIN, e.what());
  } catch (const std::out_of_range& e) {
    return fail(HH_ERR_ARGUMENT, e.what());
  } catch (const std::invalid_argument& e) {
    const std::string m = e.what();
    if (m.rfind("no series", 0) == 0 || m.rfind("unknown", 0) == 0)
      return fail(HH_ERR_NOT_FOUND, m);
    return fail(HH_ERR_ARGUMENT, m);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(HH_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(HH_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    const std::string m = e.what();
    if (m.rfind("cannot write", 0) == 0) return fail(HH_ERR_IO, m);
    return fail(HH_ERR_INTERNAL, m);
  }
}

#define HH_REQUIRE(cond, what) \
  if (!(cond)) return fail(HH_ERR_ARGUMENT, what)

}  // namespace

extern "C" {

const char* hh_version(void) { return hh::kVersion; }

const char* hh_last_error(void) { return g_error.c_str(); }

const char* hh_usage(void) {
  static const std::string u = hh::usage();
  return u.c_str();
}

hh_status hh_config_parse(const char* text, hh_config** out) {
  HH_REQUIRE(text && out, "null argument");
  return guard([&] {
    *out = new hh_config{hh::ExperimentConfig::parse(text), {}};
    return HH_OK;
  });
}

hh_status hh_config_load(const char* path, hh_config** out) {
  HH_REQUIRE(path && out, "null argument");
  return guard([&] {
    *out = new hh_config{hh::ExperimentConfig::load(path), {}};
    return HH_OK;
  });
}

hh_config* hh_config_new(void) { return new (std::nothrow) hh_config{}; }

hh_status hh_config_set(hh_config* config, const char* key, const char* value) {
  HH_REQUIRE(config && key && value, "null argument");
  return guard([&] {
    config->config.set(key, value);
    return HH_OK;
  });
}

hh_status hh_config_get(const hh_config* config, const char* key, const char** value) {
  HH_REQUIRE(config && key && value, "null argument");
  auto it = config->config.entries.find(key);
  if (it == config->config.entries.end())
    return fail(HH_ERR_NOT_FOUND, std::string("no key '") + key + "'");
  *value = it->second.value.c_str();
  return HH_OK;
}

void hh_config_free(hh_config* config) { delete config; }

hh_status hh_run(const hh_config* config, hh_report** out) {
  HH_REQUIRE(config && out, "null argument");
  return guard([&] {
    auto* r = new hh_report{};
    try {
      r->report = hh::run(config->config);
      r->json = r->report.to_json().dump(2);
      r->payload = r->report.payload().dump(2);
      for (const auto& d : r->report.diagnostics) r->diag_values.push_back(d.values.dump());
      for (const auto& [k, s] : r->report.series)
        r->series_names += (r->series_names.empty() ? "" : ",") + k;
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
    return HH_OK;
  });
}

int hh_report_passed(const hh_report* report) { return report && report->report.passed() ? 1 : 0; }

const char* hh_report_json(const hh_report* report) { return report ? report->json.c_str() : ""; }

const char* hh_report_payload(const hh_report* report) {
  return report ? report->payload.c_str() : "";
}

int hh_report_diagnostic_count(const hh_report* report) {
  return report ? static_cast<int>(report->report.diagnostics.size()) : 0;
}

hh_status hh_report_diagnostic(const hh_report* report, int index, const char** name, int* passed,
                               int* asserted, double* seconds, const char** values) {
  HH_REQUIRE(report, "null argument");
  HH_REQUIRE(index >= 0 && index < hh_report_diagnostic_count(report), "diagnostic index out of range");
  const hh::Diagnostic& d = report->report.diagnostics[index];
  if (name) *name = d.name.c_str();
  if (passed) *passed = d.passed ? 1 : 0;
  if (asserted) *asserted = d.asserted ? 1 : 0;
  if (seconds) *seconds = d.seconds;
  if (values) *values = report->diag_values[index].c_str();
  return HH_OK;
}

const char* hh_report_series(const hh_report* report) {
  return report ? report->series_names.c_str() : "";
}

hh_status hh_report_series_csv(const hh_report* report, const char* kind, const char** csv) {
  HH_REQUIRE(report && kind && csv, "null argument");
  return guard([&] {
    auto* r = const_cast<hh_report*>(report);
    auto it = r->csv.find(kind);
    if (it == r->csv.end()) it = r->csv.emplace(kind, hh::series_csv(r->report, kind)).first;
    *csv = it->second.c_str();
    return HH_OK;
  });
}

hh_status hh_report_write(const hh_report* report, const char* dir) {
  HH_REQUIRE(report && dir, "null argument");
  return guard([&] {
    hh::write_outputs(report->report, dir);
    return HH_OK;
  });
}

void hh_report_free(hh_report* report) { delete report; }

hh_status hh_field_new(int rows, int cols, int N, hh_field** out) {
  HH_REQUIRE(out && rows > 0 && cols > 0 && N >= 0, "bad field shape");
  return guard([&] {
    *out = new hh_field{hh::Field(rows, cols, N)};
    return HH_OK;
  });
}

hh_status hh_field_exhalf(hh_field** out) {
  HH_REQUIRE(out, "null argument");
  return guard([&] {
    *out = new hh_field{hh::exhalf(1)};
    return HH_OK;
  });
}

hh_status hh_field_load(const char* path, hh_field** out) {
  HH_REQUIRE(path && out, "null argument");
  if (!std::filesystem::is_regular_file(path))
    return fail(HH_ERR_IO, std::string("cannot open field file '") + path + "'");
  return guard([&] {
    *out = new hh_field{hh::load_field(path)};
    return HH_OK;
  });
}

hh_status hh_field_set_mode(hh_field* f, int component, int n, double re, double im) {
  HH_REQUIRE(f && n >= 0, "bad argument");
  HH_REQUIRE(n > 0 || im == 0.0, "mode 0 must be real");
  return guard([&] {
    f->field.set_mode(component, n, hh::cd(re, im));
    return HH_OK;
  });
}

hh_status hh_field_get_mode(const hh_field* f, int component, int n, double* re, double* im) {
  HH_REQUIRE(f && re && im, "null argument");
  HH_REQUIRE(component >= 0 && component < f->field.m() && std::abs(n) <= f->field.N(),
             "mode outside field");
  const hh::cd c = f->field.coef(component, n);
  *re = c.real();
  *im = c.imag();
  return HH_OK;
}

hh_status hh_field_shape(const hh_field* f, int* rows, int* cols, int* N) {
  HH_REQUIRE(f && rows && cols && N, "null argument");
  *rows = f->field.rows();
  *cols = f->field.cols();
  *N = f->field.N();
  return HH_OK;
}

hh_status hh_field_apply(const hh_field* f, const char* op, hh_field** out) {
  HH_REQUIRE(f && op && out, "null argument");
  return guard([&] {
    const std::string o = op;
    hh::Field r;
    if (o == "quarter")
      r = hh::quarter(f->field);
    else if (o == "riesz")
      r = hh::riesz(f->field);
    else if (o == "ddtheta")
      r = hh::ddtheta(f->field);
    else if (o == "half_laplacian")
      r = hh::lap_pow(f->field, 0.5);
    else
      return fail(HH_ERR_NOT_FOUND, "unknown operator '" + o + "'");
    *out = new hh_field{std::move(r)};
    return HH_OK;
  });
}

hh_status hh_field_eval(const hh_field* f, double theta, double* values) {
  HH_REQUIRE(f && values, "null argument");
  const Eigen::VectorXd v = f->field.eval(theta);
  for (int k = 0; k < v.size(); ++k) values[k] = v(k);
  return HH_OK;
}

hh_status hh_field_l2_norm(const hh_field* f, double* out) {
  HH_REQUIRE(f && out, "null argument");
  *out = hh::l2_norm(f->field);
  return HH_OK;
}

void hh_field_free(hh_field* f) { delete f; }

hh_status hh_half_energy(const hh_field* u, double* out) {
  HH_REQUIRE(u && out, "null argument");
  return guard([&] {
    *out = hh::half_energy(u->field);
    return HH_OK;
  });
}

hh_status hh_half_harmonic_residual(const hh_field* u, const char* distribution, double* out) {
  HH_REQUIRE(u && distribution && out, "null argument");
  return guard([&] {
    const hh::Distribution D = hh::make_builtin(distribution);
    if (u->field.rows() != D->m() || u->field.cols() != 1)
      return fail(HH_ERR_ARGUMENT, "loop dimension does not match the distribution");
    *out = hh::half_harmonic_residual(u->field, *D);
    return HH_OK;
  });
}

}  // extern "C"
