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

#include "runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "commutators.hpp"
#include "distributions.hpp"
#include "extension.hpp"
#include "gauge.hpp"
#include "geodesics.hpp"
#include "halfharmonic.hpp"

namespace hh {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), v.size()); }

Diagnostic check(const std::string& name, json values, bool passed) {
  Diagnostic d;
  d.name = name;
  d.values = std::move(values);
  d.passed = passed;
  return d;
}

Diagnostic note(const std::string& name, json values) {
  Diagnostic d = check(name, std::move(values), true);
  d.asserted = false;
  return d;
}

Distribution distribution_of(const ExperimentConfig& c) {
  const std::string spec = c.distribution;
  if (spec.rfind("file:", 0) == 0) {
    std::ifstream f(spec.substr(5));
    if (!f) throw ConfigError("cannot open distribution file '" + spec.substr(5) + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return make_polynomial(ss.str());
  }
  return make_builtin(spec);
}

// ---------------------------------------------------------------- operators

void run_operators(const ExperimentConfig& c, RunReport& r) {
  c.check_keys({"max_mode", "trials", "tol"});
  const int nmax = c.get_int("max_mode", 128);
  const int trials = c.get_int("trials", 5);
  const int N = c.N > 0 ? c.N : 32;
  const double tol = c.get_double("tol", 1e-12);
  double err_q = 0.0, err_r = 0.0;
  for (int n = -nmax; n <= nmax; ++n) {
    Field e(1, 1, nmax);
    e.coeffs()(0, n + nmax) = 1.0;
    const cd q = quarter(e).coef(0, n), rz = riesz(e).coef(0, n);
    const double sg = n > 0 ? 1.0 : (n < 0 ? -1.0 : 0.0);
    err_q = std::max(err_q, std::abs(q - std::sqrt(std::abs(double(n)))));
    err_r = std::max(err_r, std::abs(rz - cd(0.0, sg)));
    // The output must be exactly one mode.
    err_q = std::max(err_q, std::abs(quarter(e).coeffs().norm() - std::abs(q)));
  }
  double semigroup = 0.0, adjoint = 0.0;
  const double alphas[][2] = {{0.25, 0.25}, {0.25, 0.5}, {0.5, 0.7}, {1.0, 0.3}};
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(split_seed(c.seed, t));
    const Field f = random_field(2, 1, N, rng), g = random_field(2, 1, N, rng);
    for (const auto& ab : alphas) {
      const Field twice = inv_frac_zero_mean(inv_frac_zero_mean(f, ab[0]), ab[1]);
      const Field once = inv_frac_zero_mean(f, ab[0] + ab[1]);
      semigroup = std::max(semigroup, rel_residual(twice, once));
      const double lhs = inner(inv_frac_zero_mean(f, ab[0]), g);
      const double rhs = inner(f, inv_frac_zero_mean(g, ab[0]));
      adjoint = std::max(adjoint, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
  }
  r.diagnostics.push_back(check("symbols", {{"max_mode", nmax}, {"quarter", err_q}, {"riesz", err_r}},
                                err_q <= tol && err_r <= tol));
  r.diagnostics.push_back(check("semigroup", {{"trials", trials}, {"bandwidth", N}, {"residual", semigroup}},
                                semigroup <= tol));
  r.diagnostics.push_back(check("adjointness", {{"trials", trials}, {"residual", adjoint}}, adjoint <= tol));
}

// -------------------------------------------------------------- commutators

void run_commutators(const ExperimentConfig& c, RunReport& r) {
  c.check_keys({"op", "decompose", "trials", "matrix_size", "tol", "constant_q"});
  const int trials = c.get_int("trials", 100);
  const int N = c.N > 0 ? c.N : 16;
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (c.has("decompose")) {
    const std::string kind = c.get("decompose", "T");
    if (kind != "T" && kind != "S" && kind != "F")
      throw ConfigError("decompose must be one of F, T, S, got '" + kind + "'");
    const int m = c.get_int("matrix_size", 3);
    const double tol = c.get_double("tol", 1e-9);
    std::vector<double> res(trials), lit(trials);
    parallel_for(trials, c.threads, [&](int t) {
      std::mt19937_64 rng(split_seed(c.seed, t));
      const Field P = random_field(m, m, N, rng), Q = random_field(m, m, N, rng);
      const Field v = random_field(m, 1, N, rng, 1.0, true);
      if (kind == "F") {
        const auto d = decompose_F(P, Q, v);
        res[t] = d.residual;
        lit[t] = d.literal_residual;
      } else if (kind == "T") {
        const auto d = decompose_T(P, Q, v);
        res[t] = d.residual;
        lit[t] = d.reading_plus_quarter;
      } else {
        const auto d = decompose_S(P, Q, v);
        res[t] = d.residual;
        lit[t] = d.literal_residual;
      }
    });
    const double worst = *std::max_element(res.begin(), res.end());
    r.outputs["decomposition"] = {{"kind", kind}, {"trials", trials}, {"bandwidth", N},
                                  {"residuals", res}, {"literal_residuals", lit}};
    r.diagnostics.push_back(check("decompose_" + kind, {{"trials", trials}, {"max_residual", worst}},
                                  worst <= tol));
    r.diagnostics.push_back(note("decompose_" + kind + "_literal",
                                 {{"max_residual", *std::max_element(lit.begin(), lit.end())}}));
  }
  if (c.has("op") || !c.has("decompose")) {
    const std::string op = c.get("op", "T");
    const ProbeStats s = norm_ratio_probe(op, trials, N, c.seed, c.get_bool("constant_q", false));
    r.outputs["probe"] = {{"op", s.op},
                          {"trials", s.trials},
                          {"max_ratio", s.max_ratio},
                          {"mean_ratio", s.mean_ratio},
                          {"scale_invariance", s.scale_invariance},
                          {"ratios", s.ratios}};
    r.diagnostics.push_back(note("probe_" + op, {{"max_ratio", s.max_ratio}, {"mean_ratio", s.mean_ratio}}));
  }
}

// -------------------------------------------------------------------- gauge

void add_history(Series& s, int solver, const std::vector<double>& h) {
  for (size_t i = 0; i < h.size(); ++i) s.add({double(solver), double(i), h[i]});
}

Field loop_from(const ExperimentConfig& c, const std::string& key) {
  const std::string v = c.get(key, "exhalf");
  if (v == "exhalf") return exhalf(std::max(1, c.N));
  return load_field(v);
}

json z_labels(const SchrodingerSystem& sys) {
  json out = json::array();
  for (const auto& z : sys.Z)
    out.push_back({{"kind", to_string(z.kind)}, {"weight", z.weight}, {"riesz_input", z.riesz_input},
                   {"label", z.label}});
  return out;
}

void run_gauge(const ExperimentConfig& c, RunReport& r) {
  c.check_keys({"omega0", "tol", "max_iter", "sweep", "sweep_samples", "sweep_smax", "loop",
                "uniqueness_bandwidth", "gauge_bandwidth", "corrector_tol"});
  GaugeOptions go;
  go.max_iter = c.get_int("max_iter", go.max_iter);
  go.N = c.get_int("gauge_bandwidth", 0);
  go.seed = c.seed;
  const double tol = c.get_double("tol", 1e-6);
  CorrectorOptions co;
  co.tol = c.get_double("corrector_tol", 1e-10);

  SchrodingerSystem sys;
  Field v;
  std::string source;
  if (c.has("omega0")) {
    const Field O = load_field(c.get("omega0", ""));
    if (O.rows() != O.cols()) throw ConfigError("omega0 must be a square matrix field");
    sys = SchrodingerSystem::zero(O.rows());
    sys.Omega0 = O;
    v = Field(O.rows(), 1, 0);
    source = c.get("omega0", "");
  } else {
    const EulerSystem e = assemble_euler_system(*distribution_of(c), loop_from(c, "loop"));
    sys = e.system;
    v = e.v;
    source = "euler system of " + c.get("loop", "exhalf");
  }
  const double anti = antisymmetry_defect(sys.Omega0);
  if (anti > 1e-12) throw std::invalid_argument("Omega0 is not antisymmetric (defect " +
                                                format_double(anti) + ")");
  const GaugeSolution s = solve_gauge_system(sys, v, go, co);
  const auto& g = s.gauge;
  r.outputs["gauge"] = {
      {"source", source},
      {"omega0_l2", g.omega_l2},
      {"omega0_mean", g.omega_mean},
      {"small_data", g.small_data},
      {"converged", g.converged},
      {"iterations", g.iterations},
      {"restarts", g.restarts_used},
      {"residual_gauge", s.residual_gauge},
      {"residual_corrector", s.residual_corrector},
      {"residual_corrector_literal", s.corrector.literal_residual},
      {"residual_conservation", s.residual_conservation},
      {"residual_conservation_literal", s.conservation.literal_residual},
      {"zero_mode", s.zero_mode},
      {"corrector_contraction", s.corrector.contraction},
      {"corrector_linf", s.corrector.linf},
      {"corrector_direct", s.corrector.direct},
      {"step2_identity", s.varpi.identity_residual},
      {"varpi_l21_proxy", s.varpi.l21_proxy},
      {"min_singular_A", s.min_singular_A},
      {"orthogonality", g.rotation.orthogonality},
      {"min_det", g.rotation.min_det},
      {"hardy_ratio", s.conservation.hardy_ratio},
      {"B", {{"E", field_to_json(s.corrector.E)}, {"P", field_to_json(g.P)}, {"Q", z_labels(sys)}}},
  };
  Series hist;
  hist.columns = {"solver", "iteration", "residual"};
  add_history(hist, 0, g.history);
  add_history(hist, 1, s.corrector.history);
  r.series["residual-history"] = hist;

  r.diagnostics.push_back(check("gauge", {{"residual", s.residual_gauge}, {"tol", tol}},
                                s.residual_gauge <= tol));
  r.diagnostics.push_back(check("rotation", {{"orthogonality", g.rotation.orthogonality},
                                             {"min_det", g.rotation.min_det}},
                                g.rotation.orthogonality <= 1e-8 && g.rotation.min_det > 0.0));
  r.diagnostics.push_back(check("corrector", {{"residual", s.residual_corrector}, {"tol", tol}},
                                s.residual_corrector <= tol));
  r.diagnostics.push_back(check("conservation", {{"residual", s.residual_conservation}, {"tol", tol}},
                                s.residual_conservation <= tol));
  r.diagnostics.push_back(check("A_invertible", {{"min_singular", s.min_singular_A}},
                                s.min_singular_A > 0.0));
  r.diagnostics.push_back(note("circle_zero_mode",
                               {{"zero_mode", s.zero_mode},
                                {"corrector_literal", s.corrector.literal_residual},
                                {"conservation_literal", s.conservation.literal_residual}}));

  if (c.get("sweep", "") == "energy") {
    const Field u = loop_from(c, "loop");
    const int Nu = c.get_int("uniqueness_bandwidth", 12);
    const auto rows = uniqueness_sweep(u, *distribution_of(c), Nu, c.get_int("sweep_samples", 21),
                                       c.get_double("sweep_smax", 1.0));
    Series sw;
    sw.columns = {"s", "energy", "sigma_min"};
    for (const auto& row : rows) sw.add({row.s, row.energy, row.sigma_min});
    r.series["sweep"] = sw;
  } else if (c.has("sweep")) {
    throw ConfigError("sweep must be 'energy'");
  }
}

// ----------------------------------------------------------------- geodesic

void run_geodesic(const ExperimentConfig& c, RunReport& r) {
  c.check_keys({"u0", "xi0", "span", "step", "tol"});
  const Distribution D = distribution_of(c);
  if (!c.has("u0") || !c.has("xi0")) throw ConfigError("geodesic needs u0 and xi0");
  const Vec u0 = to_vec(c.get_list("u0", {})), xi0 = to_vec(c.get_list("xi0", {}));
  if (u0.size() != D->m() || xi0.size() != D->m())
    throw ConfigError("u0 and xi0 must have " + std::to_string(D->m()) + " entries");
  const double span = c.get_double("span", kTwoPi);
  const double step = c.get_double("step", kTwoPi / 2048);
  const double tol = c.get_double("tol", 1e-8);
  const GeodesicTrajectory t = integrate(*D, {u0, xi0}, span, step);
  Series tr;
  tr.columns = {"theta"};
  for (int k = 0; k < D->m(); ++k) tr.columns.push_back("u" + std::to_string(k));
  for (int k = 0; k < D->m(); ++k) tr.columns.push_back("xi" + std::to_string(k));
  tr.columns.push_back("H");
  for (size_t i = 0; i < t.states.size(); ++i) {
    std::vector<double> row{t.theta[i]};
    for (int k = 0; k < D->m(); ++k) row.push_back(t.states[i].u(k));
    for (int k = 0; k < D->m(); ++k) row.push_back(t.states[i].xi(k));
    row.push_back(t.hamiltonian[i]);
    tr.add(row);
  }
  r.series["trajectory"] = tr;
  const double horiz = horizontality_defect(*D, t);
  const auto red = integrable_reduction_check(*D, t);
  const double red_max = red.empty() ? 0.0 : *std::max_element(red.begin(), red.end());
  r.outputs["geodesic"] = {{"distribution", D->name()},
                           {"steps", t.states.size() - 1},
                           {"closure_defect", t.closure_defect()},
                           {"max_drift", t.max_drift()},
                           {"horizontality", horiz},
                           {"integrable_reduction", red_max},
                           {"truncated", t.truncated}};
  r.diagnostics.push_back(check("horizontality", {{"defect", horiz}, {"tol", tol}},
                                horiz <= tol && !t.truncated));
  r.diagnostics.push_back(note("hamiltonian", {{"max_drift", t.max_drift()}}));
  r.diagnostics.push_back(note("closure", {{"defect", t.closure_defect()}}));
}

// ------------------------------------------------------------- halfharmonic

void run_halfharmonic(const ExperimentConfig& c, RunReport& r) {
  c.check_keys({"init", "penalty_schedule", "tol", "radius", "symmetry", "updates"});
  const Distribution D = distribution_of(c);
  const std::string init = c.get("init", "exhalf");
  const int N = c.N > 0 ? c.N : 6;
  Field u0;
  if (init == "exhalf") {
    u0 = exhalf(N);
  } else if (init.rfind("perturbed:", 0) == 0) {
    u0 = perturbed_exhalf(std::stod(init.substr(10)), c.seed, N);
  } else if (init.rfind("file:", 0) == 0) {
    u0 = load_field(init.substr(5));
  } else {
    throw ConfigError("init must be exhalf, perturbed:<eps> or file:<path>, got '" + init + "'");
  }
  if (u0.rows() != D->m()) throw ConfigError("initial loop does not live in R^" + std::to_string(D->m()));
  SolveOptions o;
  o.tol = c.get_double("tol", 1e-6);
  o.penalties = c.get_list("penalty_schedule", o.penalties);
  o.updates_per_penalty = c.get_int("updates", o.updates_per_penalty);
  const std::string rad = c.get("radius", "auto"), sym = c.get("symmetry", "auto");
  o.hh.radius = rad == "on" ? RadiusMode::On : rad == "off" ? RadiusMode::Off : RadiusMode::Auto;
  o.symmetry = sym == "antipodal" ? SymmetryMode::Antipodal
               : sym == "none"    ? SymmetryMode::None
                                  : SymmetryMode::Auto;
  const SolveResult s = solve(u0, *D, o);
  const ELReport& e = s.report;
  r.outputs["pair"] = {{"u", field_to_json(s.pair.u)},
                       {"xi", field_to_json(s.pair.xi)},
                       {"pairing_residual", s.pair.pairing_residual},
                       {"tangent_xi_norm", s.pair.tangent_xi_norm},
                       {"tangent_du_norm", s.pair.tangent_du_norm}};
  r.outputs["el_report"] = {{"el_tangent", e.el_tangent},
                            {"el_normal", e.el_normal},
                            {"horizontality", e.horizontality},
                            {"xi_drift", e.xi_drift},
                            {"multiplier_fit", e.multiplier_fit},
                            {"multiplier_fit_no_radius", e.multiplier_fit_no_radius},
                            {"riesz_form", e.riesz_form},
                            {"riesz_form_alt_sign", e.riesz_form_alt_sign},
                            {"projected_riesz_form", e.projected_riesz_form},
                            {"projected_normal", e.projected_normal},
                            {"omega_antisymmetry", e.omega_antisymmetry},
                            {"Omega_antisymmetry", e.Omega_antisymmetry},
                            {"half_harmonic", e.half_harmonic},
                            {"lambda", vec_json(e.lambda)},
                            {"radius_multiplier", e.radius_multiplier},
                            {"radius_constraint", e.radius_constraint},
                            {"max_residual", e.max_residual()}};
  r.outputs["solve"] = {{"energy", s.energy},
                        {"violation", s.violation},
                        {"half_harmonic", s.half_harmonic},
                        {"outer_iterations", s.outer_iterations},
                        {"converged", s.converged},
                        {"stalled", s.stalled},
                        {"degenerate", s.degenerate},
                        {"constant_loop", s.constant_loop}};
  if (D->name() == "hopf_C2")
    r.outputs["solve"]["distance_to_exhalf"] = align_to_exhalf(s.pair.u).distance;
  Series hist;
  hist.columns = {"outer", "penalty", "energy", "violation", "half_harmonic"};
  for (const auto& h : s.history) hist.add({double(h.outer), h.penalty, h.energy, h.violation, h.half_harmonic});
  r.series["residual-history"] = hist;
  r.diagnostics.push_back(check("solve", {{"converged", s.converged},
                                          {"half_harmonic", s.half_harmonic},
                                          {"violation", s.violation}},
                                s.converged && !s.constant_loop));
}

// ------------------------------------------------------------------- extend

void run_extend(const ExperimentConfig& c, RunReport& r) {
  c.check_keys({"input", "radial_points", "angular_nodes", "tol"});
  const Distribution D = distribution_of(c);
  const Field u = loop_from(c, "input");
  if (u.rows() != D->m()) throw ConfigError("input loop does not live in R^" + std::to_string(D->m()));
  const int radial = c.get_int("radial_points", 8);
  const int angular = c.M > 0 ? c.M : c.get_int("angular_nodes", 0);
  const DiskField F = poisson_extend(u, radial, angular);
  const ConformalityReport rep = conformality_report(F, *D, c.get_double("tol", 1e-8));
  Series disk;
  disk.columns = {"r", "theta"};
  for (int k = 0; k < u.rows(); ++k) disk.columns.push_back("u" + std::to_string(k));
  for (double rad : F.radii())
    for (int j = 0; j < F.angular_nodes(); ++j) {
      const Vec val = F.value(std::polar(rad, F.theta(j)));
      std::vector<double> row{rad, F.theta(j)};
      for (int k = 0; k < val.size(); ++k) row.push_back(val(k));
      disk.add(row);
    }
  r.series["disk-field"] = disk;
  r.outputs["conformality"] = {{"boundary_im_z2f", rep.boundary_im_z2f},
                               {"disk_max_f", rep.disk_max_f},
                               {"tangent_radial", rep.tangent_radial},
                               {"normal_angular", rep.normal_angular},
                               {"holomorphy", rep.holomorphy},
                               {"horizontality_gate", rep.horizontality_gate},
                               {"half_harmonic_gate", rep.half_harmonic_gate},
                               {"gates_passed", rep.gates_passed},
                               {"passed", rep.passed}};
  Diagnostic d = check("conformality", r.outputs["conformality"], rep.passed);
  // Conformality is only claimed for horizontal half-harmonic boundaries.
  d.asserted = rep.gates_passed;
  r.diagnostics.push_back(d);
}

// ------------------------------------------------------------------- verify

void run_verify(const ExperimentConfig& c, RunReport& r) {
  c.check_keys({"suite", "gauge_bandwidth"});
  const std::string suite = c.get("suite", "exhalf");
  std::vector<Diagnostic> d;
  if (suite == "exhalf")
    d = exhalf_suite(c, r);
  else if (suite == "acceptance")
    d = acceptance_suite(c, r);
  else
    throw ConfigError("suite must be exhalf or acceptance, got '" + suite + "'");
  r.diagnostics.insert(r.diagnostics.end(), d.begin(), d.end());
}

}  // namespace

void Series::add(const std::vector<double>& row) {
  std::vector<std::string> cells;
  cells.reserve(row.size());
  for (double v : row) cells.push_back(format_double(v));
  rows.push_back(std::move(cells));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool RunReport::passed() const {
  return std::all_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.passed || !d.asserted; });
}

json RunReport::payload() const {
  json cfg = json::object();
  for (const auto& [k, e] : config.entries) cfg[k] = e.value;
  json diags = json::array();
  for (const auto& d : diagnostics)
    diags.push_back({{"name", d.name}, {"passed", d.passed}, {"asserted", d.asserted}, {"values", d.values}});
  json series_names = json::array();
  for (const auto& [k, s] : series) series_names.push_back(k);
  return {{"version", kVersion},   {"subcommand", config.subcommand}, {"seed", config.seed},
          {"config", cfg},         {"diagnostics", diags},            {"outputs", outputs},
          {"series", series_names}, {"passed", passed()}};
}

json RunReport::to_json() const {
  json j = payload();
  json t = json::object();
  for (const auto& d : diagnostics) {
    t[d.name] = d.seconds;
    if (d.time_limit > 0.0) t[d.name + ".limit"] = d.time_limit;
  }
  j["timing"] = {{"wall_seconds", wall_seconds}, {"diagnostics", t}};
  return j;
}

RunReport run(const ExperimentConfig& config) {
  RunReport r;
  r.config = config;
  const auto t0 = Clock::now();
  const std::string& s = config.subcommand;
  if (s == "operators")
    run_operators(config, r);
  else if (s == "commutators")
    run_commutators(config, r);
  else if (s == "gauge")
    run_gauge(config, r);
  else if (s == "geodesic")
    run_geodesic(config, r);
  else if (s == "halfharmonic")
    run_halfharmonic(config, r);
  else if (s == "extend")
    run_extend(config, r);
  else if (s == "verify")
    run_verify(config, r);
  else if (s.empty())
    throw ConfigError("no subcommand given\n" + usage());
  else
    throw ConfigError("unknown subcommand '" + s + "'\n" + usage());
  r.wall_seconds = since(t0);
  return r;
}

std::string usage() {
  return "usage: hhlab <subcommand> [--config FILE] [--out-dir DIR] [--seed N] [--threads N]\n"
         "             [--set key=value]... [--KEY VALUE]...\n"
         "subcommands:\n"
         "  operators     symbols of (-Delta)^{1/4} and R, semigroup and adjointness\n"
         "  commutators   decomposition residuals (decompose=F|T|S) or norm-ratio probes (op=...)\n"
         "  gauge         gauge, corrector and conservation law; sweep=energy for sigma_min curves\n"
         "  geodesic      normal geodesic flow (u0, xi0, span, step)\n"
         "  halfharmonic  constrained minimization of the half energy (init, penalty_schedule)\n"
         "  extend        harmonic extension and Hopf differential (input, radial_points)\n"
         "  verify        suite=exhalf or suite=acceptance\n"
         "Config files hold key = value lines with optional [section] headers.\n"
         "--KEY VALUE sets a config key; dashes in KEY read as underscores\n"
         "(--max-iter 50 is max_iter = 50). Command-line keys override the file.\n"
         "HHLAB_OUT_DIR overrides the output directory.\n";
}

std::string series_csv(const RunReport& report, const std::string& kind) {
  auto it = report.series.find(kind);
  if (it == report.series.end()) {
    std::string names;
    for (const auto& [k, s] : report.series) names += (names.empty() ? "" : ", ") + k;
    throw std::invalid_argument("no series '" + kind + "' in report; available: " +
                                (names.empty() ? "none" : names));
  }
  std::string out;
  const Series& s = it->second;
  for (size_t i = 0; i < s.columns.size(); ++i) out += (i ? "," : "") + s.columns[i];
  out += "\n";
  for (const auto& row : s.rows) {
    for (size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += "\n";
  }
  return out;
}

std::string emit_plotdata(const RunReport& report, const std::string& kind,
                          const std::string& out_dir) {
  const std::string csv = series_csv(report, kind);
  std::filesystem::create_directories(out_dir);
  const std::string path = (std::filesystem::path(out_dir) / (kind + ".csv")).string();
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << csv;
  return path;
}

std::vector<std::string> write_outputs(const RunReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> paths;
  const std::string path = (std::filesystem::path(out_dir) / "report.json").string();
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << report.to_json().dump(2) << "\n";
  paths.push_back(path);
  for (const auto& [k, s] : report.series) paths.push_back(emit_plotdata(report, k, out_dir));
  return paths;
}

json field_to_json(const Field& f) {
  json modes = json::array();
  for (int k = 0; k < f.m(); ++k) {
    json comp = json::array();
    for (int n = 0; n <= f.N(); ++n) comp.push_back({f.coef(k, n).real(), f.coef(k, n).imag()});
    modes.push_back(comp);
  }
  return {{"rows", f.rows()}, {"cols", f.cols()}, {"N", f.N()}, {"modes", modes}};
}

Field field_from_json(const json& j) {
  const int rows = j.at("rows").get<int>(), cols = j.at("cols").get<int>(), N = j.at("N").get<int>();
  if (rows < 1 || cols < 1 || N < 0) throw std::invalid_argument("field file: bad shape");
  const json& modes = j.at("modes");
  if (!modes.is_array() || static_cast<int>(modes.size()) != rows * cols)
    throw std::invalid_argument("field file: expected rows*cols components in 'modes'");
  Field f(rows, cols, N);
  for (int k = 0; k < rows * cols; ++k) {
    const json& comp = modes[k];
    if (!comp.is_array() || static_cast<int>(comp.size()) != N + 1)
      throw std::invalid_argument("field file: component " + std::to_string(k) +
                                  " needs N+1 modes");
    for (int n = 0; n <= N; ++n) {
      const double re = comp[n].at(0).get<double>(), im = comp[n].at(1).get<double>();
      if (n == 0 && im != 0.0) throw std::invalid_argument("field file: mode 0 must be real");
      f.set_mode(k, n, cd(re, im));
    }
  }
  return f;
}

Field load_field(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open field file '" + path + "'");
  try {
    return field_from_json(json::parse(f));
  } catch (const json::exception& e) {
    throw ConfigError("field file '" + path + "': " + e.what());
  }
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  const int w = std::max(1, std::min(threads, n));
  if (w == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> pool;
  for (int t = 0; t < w; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i; (i = next.fetch_add(1)) < n;) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace hh
