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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "halfharm/halfharm.h"

namespace {

struct Config {
  hh_config* c = nullptr;
  ~Config() { hh_config_free(c); }
};
struct Report {
  hh_report* r = nullptr;
  ~Report() { hh_report_free(r); }
};
struct FieldH {
  hh_field* f = nullptr;
  ~FieldH() { hh_field_free(f); }
};

}  // namespace

TEST(CApi, Version) { EXPECT_STREQ(hh_version(), "0.1.0"); }

TEST(CApi, ConfigErrorsCarryLine) {
  Config c;
  EXPECT_EQ(hh_config_parse("subcommand = operators\nbandwidth = 8\ngrid = 9\n", &c.c), HH_ERR_CONFIG);
  EXPECT_EQ(c.c, nullptr);
  EXPECT_NE(std::string(hh_last_error()).find("config line 3"), std::string::npos) << hh_last_error();
}

TEST(CApi, NullArguments) {
  EXPECT_EQ(hh_config_parse(nullptr, nullptr), HH_ERR_ARGUMENT);
  EXPECT_EQ(hh_run(nullptr, nullptr), HH_ERR_ARGUMENT);
  hh_config_free(nullptr);
  hh_report_free(nullptr);
  hh_field_free(nullptr);
}

TEST(CApi, EmptyConfigIsConfigError) {
  Config c;
  c.c = hh_config_new();
  Report r;
  EXPECT_EQ(hh_run(c.c, &r.r), HH_ERR_CONFIG);
  EXPECT_NE(std::string(hh_last_error()).find("usage:"), std::string::npos);
}

TEST(CApi, SetGetAndRollback) {
  Config c;
  c.c = hh_config_new();
  ASSERT_EQ(hh_config_set(c.c, "bandwidth", "8"), HH_OK);
  EXPECT_EQ(hh_config_set(c.c, "grid", "12"), HH_ERR_CONFIG);
  const char* v = nullptr;
  EXPECT_EQ(hh_config_get(c.c, "grid", &v), HH_ERR_NOT_FOUND);
  ASSERT_EQ(hh_config_get(c.c, "bandwidth", &v), HH_OK);
  EXPECT_STREQ(v, "8");
}

TEST(CApi, RunOperatorsAndReport) {
  Config c;
  ASSERT_EQ(hh_config_parse("subcommand = operators\n", &c.c), HH_OK);
  Report r;
  ASSERT_EQ(hh_run(c.c, &r.r), HH_OK);
  EXPECT_EQ(hh_report_passed(r.r), 1);
  ASSERT_EQ(hh_report_diagnostic_count(r.r), 3);
  const char *name = nullptr, *values = nullptr;
  int passed = 0, asserted = 0;
  double seconds = -1.0;
  ASSERT_EQ(hh_report_diagnostic(r.r, 0, &name, &passed, &asserted, &seconds, &values), HH_OK);
  EXPECT_STREQ(name, "symbols");
  EXPECT_EQ(passed, 1);
  EXPECT_GE(seconds, 0.0);
  EXPECT_EQ(values[0], '{');
  EXPECT_EQ(hh_report_diagnostic(r.r, 3, &name, &passed, &asserted, &seconds, &values),
            HH_ERR_ARGUMENT);
  EXPECT_NE(std::string(hh_report_json(r.r)).find("\"timing\""), std::string::npos);
  EXPECT_EQ(std::string(hh_report_payload(r.r)).find("\"timing\""), std::string::npos);
  const char* csv = nullptr;
  EXPECT_EQ(hh_report_series_csv(r.r, "sweep", &csv), HH_ERR_NOT_FOUND);
}

TEST(CApi, GaugeSweepCsv) {
  Config c;
  ASSERT_EQ(hh_config_parse("subcommand = gauge\nsweep = energy\nsweep_samples = 3\n"
                            "uniqueness_bandwidth = 6\ngauge_bandwidth = 16\n",
                            &c.c),
            HH_OK);
  Report r;
  ASSERT_EQ(hh_run(c.c, &r.r), HH_OK) << hh_last_error();
  EXPECT_NE(std::string(hh_report_series(r.r)).find("sweep"), std::string::npos);
  const char* csv = nullptr;
  ASSERT_EQ(hh_report_series_csv(r.r, "sweep", &csv), HH_OK);
  const std::string text = csv;
  EXPECT_EQ(text.substr(0, text.find('\n')), "s,energy,sigma_min");
  const auto dir = std::filesystem::temp_directory_path() / "hh_test_capi_gauge";
  std::filesystem::remove_all(dir);
  ASSERT_EQ(hh_report_write(r.r, dir.string().c_str()), HH_OK);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "sweep.csv"));
  std::filesystem::remove_all(dir);
}

TEST(CApi, FieldOperators) {
  FieldH f, q, r;
  ASSERT_EQ(hh_field_new(1, 1, 4, &f.f), HH_OK);
  ASSERT_EQ(hh_field_set_mode(f.f, 0, 4, 1.0, 0.0), HH_OK);
  EXPECT_EQ(hh_field_set_mode(f.f, 0, 5, 1.0, 0.0), HH_ERR_ARGUMENT);
  EXPECT_EQ(hh_field_set_mode(f.f, 0, 0, 1.0, 2.0), HH_ERR_ARGUMENT);
  ASSERT_EQ(hh_field_apply(f.f, "quarter", &q.f), HH_OK);
  double re = 0, im = 0;
  ASSERT_EQ(hh_field_get_mode(q.f, 0, 4, &re, &im), HH_OK);
  EXPECT_NEAR(re, 2.0, 1e-14);
  ASSERT_EQ(hh_field_apply(f.f, "riesz", &r.f), HH_OK);
  ASSERT_EQ(hh_field_get_mode(r.f, 0, -4, &re, &im), HH_OK);
  EXPECT_NEAR(im, -1.0, 1e-14);
  hh_field* bad = nullptr;
  EXPECT_EQ(hh_field_apply(f.f, "laplace", &bad), HH_ERR_NOT_FOUND);
  double v[1];
  ASSERT_EQ(hh_field_eval(f.f, 0.0, v), HH_OK);
  EXPECT_NEAR(v[0], 2.0, 1e-14);
}

TEST(CApi, ExhalfEnergyAndResidual) {
  FieldH u;
  ASSERT_EQ(hh_field_exhalf(&u.f), HH_OK);
  int rows = 0, cols = 0, N = 0;
  ASSERT_EQ(hh_field_shape(u.f, &rows, &cols, &N), HH_OK);
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(cols, 1);
  double e = 0, res = 1;
  ASSERT_EQ(hh_half_energy(u.f, &e), HH_OK);
  EXPECT_NEAR(e, 2.0 * M_PI, 1e-10);
  ASSERT_EQ(hh_half_harmonic_residual(u.f, "hopf_C2", &res), HH_OK);
  EXPECT_LT(res, 1e-10);
  EXPECT_EQ(hh_half_harmonic_residual(u.f, "sphere_tangent:3", &res), HH_ERR_ARGUMENT);
  EXPECT_EQ(hh_half_harmonic_residual(u.f, "klein", &res), HH_ERR_NOT_FOUND);
}

TEST(CApi, MissingFieldFile) {
  FieldH f;
  EXPECT_EQ(hh_field_load("/nonexistent/field.json", &f.f), HH_ERR_IO);
  EXPECT_STRNE(hh_last_error(), "");
}
