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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

#include "commutators.hpp"
#include "distributions.hpp"
#include "extension.hpp"
#include "gauge.hpp"
#include "geodesics.hpp"
#include "halfharmonic.hpp"
#include "runner.hpp"

namespace hh {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs body, stamps the runtime and folds the time limit into `passed`.
Diagnostic timed(const std::string& name, double limit,
                 const std::function<bool(json&)>& body) {
  Diagnostic d;
  d.name = name;
  d.time_limit = limit;
  const auto t0 = Clock::now();
  bool ok = false;
  try {
    ok = body(d.values);
  } catch (const std::exception& e) {
    d.values["error"] = e.what();
  }
  d.seconds = since(t0);
  d.passed = ok && (limit <= 0.0 || d.seconds < limit);
  return d;
}

double max_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

// max over a fine grid of |P_N(u) u'|.
double horizontality_max(const Field& u, const ProjectionField& D) {
  const int M = fft_size(8 * u.N() + 64);
  const GridField g = u.grid(M), dg = ddtheta(u).grid(M);
  double worst = 0.0;
  for (int t = 0; t < M; ++t)
    worst = std::max(worst, (D.PN(g.values.col(t)) * dg.values.col(t)).norm());
  return worst;
}

Field great_circle3(int N = 1) {
  Field u = Field::vector(3, N);
  u.set_mode(0, 1, 0.5);
  u.set_mode(1, 1, cd(0, -0.5));
  return u;
}

Vec stereo(double x, double y) {
  const double r2 = x * x + y * y;
  return Eigen::Vector3d(2 * x, 2 * y, r2 - 1) / (1 + r2);
}

// The extension of exhalf is (z, zbar) / sqrt 2, i.e. (x, y, x, -y) / sqrt 2.
double exhalf_extension_error(const DiskField& F) {
  const double s = 1.0 / std::sqrt(2.0);
  double err = 0.0;
  for (double r : F.radii())
    for (int j = 0; j < F.angular_nodes(); ++j) {
      const cd z = std::polar(r, F.theta(j));
      const Vec expect = s * Eigen::Vector4d(z.real(), z.imag(), z.real(), -z.imag());
      err = std::max(err, (F.value(z) - expect).norm());
    }
  return err;
}

Vec random_unit(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> nd;
  Vec z(m);
  for (int k = 0; k < m; ++k) z(k) = nd(rng);
  return z.normalized();
}

// ------------------------------------------------------------- criteria

Diagnostic criterion_operators(const ExperimentConfig& c) {
  return timed("1 operator exactness", 1.0, [&](json& v) {
    ExperimentConfig o = c;
    o.entries.clear();
    o.set("subcommand", "operators");
    o.set("seed", std::to_string(c.seed));
    const RunReport r = run(o);
    bool ok = true;
    for (const auto& d : r.diagnostics) {
      v[d.name] = d.values;
      ok = ok && d.passed;
    }
    return ok;
  });
}

Diagnostic criterion_decompositions(const ExperimentConfig& c) {
  return timed("2 multiplication decompositions", 10.0, [&](json& v) {
    bool ok = true;
    for (const char* kind : {"F", "T", "S"}) {
      ExperimentConfig o = c;
      o.entries.clear();
      o.set("subcommand", "commutators");
      o.set("decompose", kind);
      o.set("trials", "100");
      o.set("bandwidth", "16");
      o.set("seed", std::to_string(c.seed));
      o.set("threads", std::to_string(c.threads));
      const RunReport r = run(o);
      const json& out = r.outputs["decomposition"];
      v[kind] = {{"max_residual", r.diagnostics[0].values["max_residual"]},
                 {"max_literal_residual", max_of(out["literal_residuals"].get<std::vector<double>>())}};
      ok = ok && r.diagnostics[0].passed;
    }
    return ok;
  });
}

Diagnostic criterion_exhalf(const ExperimentConfig&) {
  return timed("3 exhalf ground truth", 5.0, [&](json& v) {
    const Distribution D = make_builtin("hopf_C2");
    const Field u = exhalf(1);
    const double horiz = horizontality_max(u, *D);
    const double hh = half_harmonic_residual(u, *D);
    const double E = half_energy(u);
    const double L = lagrangian_L12(make_pair(u, ddtheta(u), *D), *D);
    const DiskField F = poisson_extend(exhalf(4), 8);
    const double ext = exhalf_extension_error(F);
    const ConformalityReport cr = conformality_report(F, *D);
    v = {{"horizontality", horiz},      {"half_harmonic", hh},
         {"energy", E},                 {"energy_error", std::abs(E - kTwoPi)},
         {"lagrangian", L},             {"lagrangian_error", std::abs(L + kPi)},
         {"extension_error", ext},      {"hopf_max", cr.disk_max_f},
         {"boundary_im_z2f", cr.boundary_im_z2f}};
    return horiz <= 1e-10 && hh <= 1e-10 && std::abs(E - kTwoPi) <= 1e-10 &&
           std::abs(L + kPi) <= 1e-10 && ext <= 1e-10 && cr.disk_max_f <= 1e-10 &&
           cr.boundary_im_z2f <= 1e-10;
  });
}

Diagnostic criterion_euler(const ExperimentConfig&) {
  return timed("4 Euler-system assembly", 5.0, [&](json& v) {
    const EulerSystem e = assemble_euler_system(*make_builtin("hopf_C2"), exhalf(1));
    v = {{"residual", e.residual},
         {"antisymmetry", e.antisymmetry},
         {"literal_C_residual", e.literal_C_residual},
         {"omega0_l2", e.omega0_l2}};
    return e.residual <= 1e-8 && e.antisymmetry <= 1e-10;
  });
}

Diagnostic criterion_gauge(const ExperimentConfig& c) {
  return timed("5 gauge pipeline", 60.0, [&](json& v) {
    std::mt19937_64 rng(split_seed(c.seed, 5));
    const GaugeSolution z =
        solve_gauge_system(SchrodingerSystem::zero(4), random_field(4, 1, 6, rng));
    const double p_id = l2_norm(z.gauge.P - Field::identity(4, 0).with_bandwidth(z.gauge.P.N()));
    const double e0 = l2_norm(z.corrector.E);
    const EulerSystem e = assemble_euler_system(*make_builtin("hopf_C2"), exhalf(1));
    GaugeOptions go;
    go.seed = c.seed;
    go.N = c.get_int("gauge_bandwidth", 0);
    const GaugeSolution s = solve_gauge_system(e.system, e.v, go);
    v = {{"zero_P_minus_Id", p_id},
         {"zero_E", e0},
         {"gauge", s.residual_gauge},
         {"corrector", s.residual_corrector},
         {"conservation", s.residual_conservation},
         {"corrector_literal", s.corrector.literal_residual},
         {"conservation_literal", s.conservation.literal_residual},
         {"zero_mode", s.zero_mode},
         {"omega0_l2", s.gauge.omega_l2},
         {"min_singular_A", s.min_singular_A}};
    return p_id == 0.0 && e0 == 0.0 && s.residual_gauge <= 1e-6 && s.residual_corrector <= 1e-6 &&
           s.residual_conservation <= 1e-6;
  });
}

Diagnostic criterion_uniqueness(const ExperimentConfig& c, RunReport& report) {
  return timed("6 uniqueness operator", 0.0, [&](json& v) {
    Mat P0 = Mat::Zero(4, 4);
    P0(0, 0) = P0(2, 2) = 1.0;
    const Uniqueness k = uniqueness_operator_sigma_min(exhalf(1), *make_constant(P0), 12);
    const Distribution D = make_builtin("hopf_C2");
    const Uniqueness x = uniqueness_operator_sigma_min(exhalf(1), *D, 12);
    const auto rows = uniqueness_sweep(exhalf(1), *D, 8, 11, 1.0);
    Series sw;
    sw.columns = {"s", "energy", "sigma_min"};
    for (const auto& r : rows) sw.add({r.s, r.energy, r.sigma_min});
    report.series["sweep"] = sw;
    const std::string dir = c.out_dir.empty()
                                ? (std::filesystem::temp_directory_path() / "hhlab_acceptance").string()
                                : c.out_dir;
    const std::string path = emit_plotdata(report, "sweep", dir);
    v = {{"constant_sigma_min", k.sigma_min},
         {"exhalf_sigma_min", x.sigma_min},
         {"exhalf_energy", x.energy},
         {"sweep_rows", rows.size()},
         {"sweep_csv", std::filesystem::path(path).filename().string()}};
    return std::abs(k.sigma_min - 1.0) <= 1e-10 && std::filesystem::file_size(path) > 0 &&
           rows.size() == 11;
  });
}

Diagnostic criterion_geodesics(const ExperimentConfig&) {
  return timed("7 geodesics", 10.0, [&](json& v) {
    const Distribution S = make_sphere_tangent(3);
    const Vec u0 = Eigen::Vector3d(1, 2, 2) / 3.0, x0 = Eigen::Vector3d(2, -2, 1) / 3.0;
    const GeodesicTrajectory t = integrate(*S, {u0, x0}, kTwoPi, kTwoPi / 2048);
    double dev = 0.0;
    for (size_t i = 0; i < t.states.size(); ++i) {
      const double th = t.theta[i];
      dev = std::max(dev, (t.states[i].u - (std::cos(th) * u0 + std::sin(th) * x0)).norm());
    }
    const double red = max_of(integrable_reduction_check(*S, t));

    const Distribution H = make_heisenberg();
    const GeodesicState g0{Eigen::Vector3d(0.4, -0.2, 0.1), Eigen::Vector3d(0.9, 0.5, 0.7)};
    const double ratio = integrate(*H, g0, 10.0, 10.0 / 80).max_drift() /
                         integrate(*H, g0, 10.0, 10.0 / 160).max_drift();

    double helix = 0.0;
    for (double R : {1.0, 0.5}) {
      const double w = 1.3;
      const GeodesicState s0{Eigen::Vector3d(R, 0, 0),
                             Eigen::Vector3d(0, R * w / 2, w * (1 + R * R / 2))};
      const GeodesicTrajectory h = integrate(*H, s0, kTwoPi, kTwoPi / 2048);
      for (size_t i = 0; i < h.states.size(); ++i) {
        const double s = h.theta[i];
        const Vec exact =
            Eigen::Vector3d(R * std::cos(w * s), R * std::sin(w * s), 0.5 * R * R * w * s);
        helix = std::max(helix, (h.states[i].u - exact).norm());
      }
    }
    v = {{"great_circle_deviation", dev},
         {"drift_ratio", ratio},
         {"heisenberg_deviation", helix},
         {"integrable_reduction", red}};
    return dev <= 1e-6 && ratio >= 12.0 && helix <= 1e-5 && red <= 1e-6;
  });
}

Diagnostic criterion_integrability(const ExperimentConfig& c) {
  return timed("8 integrability classification", 1.0, [&](json& v) {
    std::mt19937_64 rng(split_seed(c.seed, 8));
    std::normal_distribution<double> nd;
    auto rnd = [&](int m) {
      Vec x(m);
      for (int k = 0; k < m; ++k) x(k) = nd(rng);
      return x;
    };
    double sphere = 0.0, constant = 0.0, sym = 0.0;
    const std::vector<Distribution> integrable = {
        make_sphere_tangent(3), make_sphere_tangent(4),
        make_constant(Eigen::Vector3d(1, 0, 1).asDiagonal().toDenseMatrix())};
    for (int t = 0; t < 50; ++t) {
      for (const auto& D : integrable) {
        const Vec z = D->name() == "constant" ? rnd(D->m()) : random_unit(rng, D->m());
        const double b = bracket_defect(*D, z, rnd(D->m()), rnd(D->m())).defect.norm();
        (D->name() == "constant" ? constant : sphere) =
            std::max(D->name() == "constant" ? constant : sphere, b);
        sym = std::max(sym, symmetric_derivative_defect(*D, z, rnd(D->m()), rnd(D->m())).norm());
      }
    }
    const Distribution hopf = make_builtin("hopf_C2");
    const double hb = bracket_defect(*hopf, Eigen::Vector4d(1, 0, 0, 0), Eigen::Vector4d::Unit(2),
                                     Eigen::Vector4d::Unit(3))
                          .defect.norm();
    v = {{"sphere_bracket", sphere}, {"constant_bracket", constant},
         {"hopf_bracket", hb},       {"symmetric_derivative", sym}};
    return sphere <= 1e-10 && constant <= 1e-10 && hb >= 0.1 && sym <= 1e-9;
  });
}

Diagnostic criterion_rewrite(const ExperimentConfig&) {
  return timed("9 2-D rewrite", 10.0, [&](json& v) {
    const Distribution S = make_sphere_tangent(3);
    const Rewrite2DReport a = verify_2d_rewrite(*S, sample_patch(stereo, 32, 0.5));
    const Rewrite2DReport b = verify_2d_rewrite(*S, sample_patch(stereo, 64, 0.5));
    const double ratio = a.residual / b.residual;
    v = {{"residual_h", a.residual},
         {"residual_h2", b.residual},
         {"ratio", ratio},
         {"antisymmetry", std::max(a.antisymmetry, b.antisymmetry)},
         {"opposite_sign_residual", b.opposite_sign_residual}};
    return ratio >= 3.5 && a.antisymmetry == 0.0 && b.antisymmetry == 0.0;
  });
}

Diagnostic criterion_solver(const ExperimentConfig& c) {
  return timed("10 solver recovery", 120.0, [&](json& v) {
    const Distribution D = make_builtin("hopf_C2");
    const Field init = perturbed_exhalf(0.05, c.seed, 6);
    const double before = half_harmonic_residual(init, *D);
    const SolveResult s = solve(init, *D);
    const double dist = align_to_exhalf(s.pair.u).distance;
    std::mt19937_64 rng(split_seed(c.seed, 10));
    const Field rnd = random_field(4, 1, 6, rng, 1.0);
    const double control = half_harmonic_residual(rnd, *D);
    const double control_el = el_residuals(make_pair(rnd, ddtheta(rnd), *D), *D).max_residual();
    v = {{"initial_half_harmonic", before},
         {"el_residual", s.report.max_residual()},
         {"half_harmonic", s.half_harmonic},
         {"distance_to_exhalf", dist},
         {"converged", s.converged},
         {"outer_iterations", s.outer_iterations},
         {"control_half_harmonic", control},
         {"control_el_residual", control_el}};
    return s.converged && s.report.max_residual() <= 1e-4 && dist <= 1e-3 &&
           std::min(control, control_el) > 1e-2;
  });
}

Diagnostic criterion_first_variation(const ExperimentConfig& c) {
  return timed("11 critical-point consistency", 30.0, [&](json& v) {
    double pairing = 0.0, dvar = 0.0;
    struct Case {
      Distribution D;
      Field u;
    };
    const std::vector<Case> cases = {{make_builtin("hopf_C2"), exhalf(1)},
                                     {make_sphere_tangent(3), great_circle3()}};
    HalfHarmonicOptions o;
    o.work_N = 24;
    for (size_t k = 0; k < cases.size(); ++k) {
      const auto& [D, u] = cases[k];
      const ConstrainedPair p = make_pair(u, ddtheta(u), *D);
      for (int t = 0; t < 20; ++t) {
        std::mt19937_64 rng(split_seed(c.seed, 1000 * (k + 1) + t));
        const TransportReport tr = variation_transport(u, *D, random_field(D->rank(), 1, 3, rng));
        pairing = std::max(pairing, std::abs(tr.pairing));
        const Field w = admissible_direction(u, *D, random_field(D->m(), 1, 4, rng, 1.5), o);
        const FirstVariation fv = first_variation(p, *D, w, random_field(D->m(), 1, 4, rng, 1.5), o);
        dvar = std::max({dvar, std::abs(fv.d_u), std::abs(fv.d_xi)});
      }
    }
    // Central differences at a non-critical pair: error ratio 4 per halving.
    const Distribution D = make_builtin("hopf_C2");
    std::mt19937_64 rng(split_seed(c.seed, 11));
    const Field u = exhalf(3) + 0.1 * random_field(4, 1, 3, rng, 2.0);
    const Field xi = ddtheta(u) + 0.1 * random_field(4, 1, 3, rng, 1.0);
    const Field w = random_field(4, 1, 3, rng, 1.5), eta = random_field(4, 1, 3, rng, 1.5);
    HalfHarmonicOptions of;
    of.work_N = 40;
    of.radius = RadiusMode::Off;
    const FirstVariation fv = first_variation(make_pair(u, xi, *D, of), *D, w, eta, of, 1e6);
    // L is quadratic in xi, so central differences along eta alone are exact
    // up to rounding; the ratio test runs along w and along (w, eta).
    auto L = [&](double t, double su, double sx) {
      return lagrangian_L12(make_pair(u + (su * t) * w, xi + (sx * t) * eta, *D, of), *D, of);
    };
    auto fd_error = [&](double t, double su, double sx) {
      return std::abs((L(t, su, sx) - L(-t, su, sx)) / (2.0 * t) - (su * fv.d_u + sx * fv.d_xi));
    };
    std::vector<double> ratios;
    for (double sx : {0.0, 1.0}) ratios.push_back(fd_error(1e-2, 1.0, sx) / fd_error(5e-3, 1.0, sx));
    const double xi_error = std::max(fd_error(1e-2, 0.0, 1.0), fd_error(5e-3, 0.0, 1.0));
    v = {{"max_pairing", pairing},
         {"max_first_variation", dvar},
         {"richardson_ratios", ratios},
         {"xi_only_error", xi_error}};
    bool ok = pairing <= 1e-6 && dvar <= 1e-6 && xi_error <= 1e-9;
    for (double r : ratios) ok = ok && r > 3.5 && r < 4.5;
    return ok;
  });
}

Diagnostic criterion_determinism(const ExperimentConfig& c) {
  return timed("12 determinism", 0.0, [&](json& v) {
    ExperimentConfig o;
    o.set("subcommand", "verify");
    o.set("suite", "exhalf");
    o.set("seed", std::to_string(c.seed));
    o.set("gauge_bandwidth", "16");
    const std::string a = run(o).payload().dump();
    const std::string b = run(o).payload().dump();
    v = {{"payload_bytes", a.size()}, {"identical", a == b}};
    return a == b;
  });
}

}  // namespace

std::vector<Diagnostic> exhalf_suite(const ExperimentConfig& c, RunReport& report) {
  std::vector<Diagnostic> out;
  const Distribution D = make_builtin("hopf_C2");
  const Field u = exhalf(1);
  out.push_back(timed("horizontality", 0.0, [&](json& v) {
    const double h = horizontality_max(u, *D);
    v = {{"max_PN_du", h}};
    return h <= 1e-10;
  }));
  out.push_back(timed("half_harmonicity", 0.0, [&](json& v) {
    const double h = half_harmonic_residual(u, *D);
    const double E = half_energy(u);
    const double L = lagrangian_L12(make_pair(u, ddtheta(u), *D), *D);
    const ELReport e = el_residuals(make_pair(u, ddtheta(u), *D), *D);
    v = {{"residual", h}, {"energy", E}, {"lagrangian", L}, {"el_max_residual", e.max_residual()}};
    return h <= 1e-10 && std::abs(E - kTwoPi) <= 1e-10 && std::abs(L + kPi) <= 1e-10 &&
           e.max_residual() <= 1e-8;
  }));
  out.push_back(timed("extension", 0.0, [&](json& v) {
    const DiskField F = poisson_extend(exhalf(4), 8);
    const ConformalityReport r = conformality_report(F, *D);
    const double ext = exhalf_extension_error(F);
    v = {{"extension_error", ext}, {"hopf_max", r.disk_max_f}, {"boundary_im_z2f", r.boundary_im_z2f}};
    return r.passed && ext <= 1e-10;
  }));
  EulerSystem e;
  out.push_back(timed("euler_system", 0.0, [&](json& v) {
    e = assemble_euler_system(*D, u);
    v = {{"residual", e.residual}, {"antisymmetry", e.antisymmetry}, {"omega0_l2", e.omega0_l2}};
    return e.residual <= 1e-8 && e.antisymmetry <= 1e-10;
  }));
  out.push_back(timed("gauge_conservation", 0.0, [&](json& v) {
    GaugeOptions go;
    go.seed = c.seed;
    go.N = c.get_int("gauge_bandwidth", 0);
    const GaugeSolution s = solve_gauge_system(e.system, e.v, go);
    Series hist;
    hist.columns = {"solver", "iteration", "residual"};
    for (size_t i = 0; i < s.gauge.history.size(); ++i) hist.add({0.0, double(i), s.gauge.history[i]});
    for (size_t i = 0; i < s.corrector.history.size(); ++i)
      hist.add({1.0, double(i), s.corrector.history[i]});
    report.series["residual-history"] = hist;
    v = {{"gauge", s.residual_gauge},
         {"corrector", s.residual_corrector},
         {"conservation", s.residual_conservation},
         {"zero_mode", s.zero_mode},
         {"min_singular_A", s.min_singular_A}};
    return s.residual_gauge <= 1e-6 && s.residual_corrector <= 1e-6 && s.residual_conservation <= 1e-6;
  }));
  Diagnostic uq = timed("uniqueness_sigma_min", 0.0, [&](json& v) {
    const Uniqueness r = uniqueness_operator_sigma_min(u, *D, 12);
    v = {{"sigma_min", r.sigma_min}, {"energy", r.energy}};
    return true;
  });
  uq.asserted = false;
  out.push_back(uq);
  return out;
}

std::vector<Diagnostic> acceptance_suite(const ExperimentConfig& c, RunReport& report) {
  return {criterion_operators(c),       criterion_decompositions(c), criterion_exhalf(c),
          criterion_euler(c),           criterion_gauge(c),          criterion_uniqueness(c, report),
          criterion_geodesics(c),       criterion_integrability(c),  criterion_rewrite(c),
          criterion_solver(c),          criterion_first_variation(c), criterion_determinism(c)};
}

}  // namespace hh
