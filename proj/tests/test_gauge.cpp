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

#include <chrono>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gauge.hpp"
#include "halfharmonic.hpp"

using namespace hh;

namespace {

Field J_cos(double eps) {
  Field O(2, 2, 1);
  Mat J(2, 2);
  J << 0, -1, 1, 0;
  for (int n : {-1, 1}) {
    O.set_mode(1, n, 0.5 * eps * J(0, 1));
    O.set_mode(2, n, 0.5 * eps * J(1, 0));
  }
  return O;
}

Field antisym_random(int m, int N, double scale, std::mt19937_64& rng, bool zero_mean = false) {
  const Field a = random_field(m, m, N, rng, 1.5, zero_mean);
  return scale * (a - a.transpose());
}

Field great_circle3() {
  Field u = Field::vector(3, 1);
  u.set_mode(0, 1, 0.5);
  u.set_mode(1, 1, cd(0, -0.5));
  return u;
}

struct ExhalfPipeline {
  EulerSystem euler;
  GaugeSolution sol;
  double seconds = 0.0;
};

const ExhalfPipeline& exhalf_pipeline() {
  static const ExhalfPipeline p = [] {
    ExhalfPipeline out;
    const auto t0 = std::chrono::steady_clock::now();
    out.euler = assemble_euler_system(*make_builtin("hopf_C2"), exhalf(1));
    out.sol = solve_gauge_system(out.euler.system, out.euler.v);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }();
  return p;
}

// Three-dimensional system with all potentials of size 1e-2.
SchrodingerSystem small_system(std::mt19937_64& rng) {
  SchrodingerSystem s = SchrodingerSystem::zero(3);
  s.Omega0 = antisym_random(3, 3, 0.01, rng, true);
  s.Omega1 = 0.01 * random_field(3, 3, 3, rng, 1.5);
  s.Z.push_back({ZKind::T, 0.01 * random_field(3, 3, 2, rng, 1.5), 1.0, false, "T"});
  s.Z.push_back({ZKind::RS, 0.01 * random_field(3, 3, 2, rng, 1.5), 0.5, false, "RS"});
  s.Z.push_back({ZKind::F, 0.01 * random_field(3, 3, 2, rng, 1.5), 1.0, true, "F"});
  s.g = random_field(3, 1, 4, rng, 1.5);
  return s;
}

}  // namespace

TEST(GaugeP, ZeroPotentialGivesIdentity) {
  const GaugeP g = solve_gauge_P(Field(3, 3, 0));
  EXPECT_TRUE(g.converged);
  EXPECT_EQ(g.residual, 0.0);
  EXPECT_LE(l2_norm(g.P - Field::identity(3, 0).with_bandwidth(g.P.N())), 1e-14);
}

TEST(GaugeP, SmallRotationGenerator) {
  const Field O = J_cos(0.01);
  const GaugeP g = solve_gauge_P(O);
  EXPECT_TRUE(g.converged);
  EXPECT_TRUE(g.small_data);
  EXPECT_LE(g.residual, 1e-6);
  EXPECT_LE(g.rotation.orthogonality, 1e-8);
  EXPECT_GT(g.rotation.min_det, 0.0);
  EXPECT_NEAR(gauge_residual(g.P, O), g.residual, 1e-12);
}

TEST(GaugeP, SignFlipInTwoDimensions) {
  // P gauge_lhs(P) P^T = -gauge_lhs(P^T), and P commutes with J when m = 2.
  const Field O = J_cos(0.2);
  const GaugeP g = solve_gauge_P(O);
  ASSERT_LE(g.residual, 1e-8);
  EXPECT_LE(gauge_residual(g.P.transpose(), -O), 1e-8);
  const GaugeP h = solve_gauge_P(-O);
  EXPECT_LE(h.residual, 1e-8);
}

TEST(GaugeP, MeanObstructionReturnsBestIterate) {
  std::mt19937_64 rng(11);
  const Field O = antisym_random(3, 3, 0.01, rng);
  const GaugeP g = solve_gauge_P(O);
  EXPECT_GT(g.omega_mean, 1e-3);
  EXPECT_FALSE(g.converged);
  EXPECT_LE(g.residual, g.initial_residual);
  EXPECT_LE(g.rotation.orthogonality, 1e-8);
}

TEST(GaugeP, LargeDataFlaggedNotSmall) {
  std::mt19937_64 rng(7);
  const Field O = antisym_random(3, 2, 0.5, rng);
  GaugeOptions o;
  o.N = 12;
  const GaugeP g = solve_gauge_P(O, o);
  EXPECT_FALSE(g.small_data);
  EXPECT_FALSE(g.history.empty());
}

TEST(Varpi, ZeroSystem) {
  const SchrodingerSystem s = SchrodingerSystem::zero(3);
  const Varpi w = build_varpi(Field::identity(3, 0), s, Field(3, 1, 0));
  EXPECT_EQ(l2_norm(w.varpi), 0.0);
}

TEST(Varpi, ConstantOmega1) {
  SchrodingerSystem s = SchrodingerSystem::zero(3);
  s.Omega1 = Field::identity(3, 0) * 2.5;
  std::mt19937_64 rng(3);
  const Field v = random_field(3, 1, 4, rng);
  const Varpi w = build_varpi(Field::identity(3, 0), s, v);
  EXPECT_LE(l2_norm(w.varpi - s.Omega1.with_bandwidth(w.varpi.N())), 1e-13);
  EXPECT_LE(w.identity_residual, 1e-12);
}

TEST(Varpi, StepTwoIdentitySeeded) {
  std::mt19937_64 rng(11);
  const SchrodingerSystem s = small_system(rng);
  const Field v = random_field(3, 1, 5, rng);
  const GaugeP g = solve_gauge_P(s.Omega0);
  ASSERT_TRUE(g.converged);
  const Varpi w = build_varpi(g.P, s, v);
  EXPECT_LE(w.identity_residual, 1e-8);
  for (double d : w.decomposition_residuals) EXPECT_LE(d, 1e-10);
}

TEST(Corrector, ZeroSystem) {
  const SchrodingerSystem s = SchrodingerSystem::zero(2);
  const Varpi w = build_varpi(Field::identity(2, 0), s, Field(2, 1, 0));
  const CorrectorE e = solve_corrector_E(w, s);
  EXPECT_EQ(l2_norm(e.E), 0.0);
  EXPECT_EQ(e.residual, 0.0);
}

TEST(Corrector, SmallSeededSystemContracts) {
  std::mt19937_64 rng(5);
  const SchrodingerSystem s = small_system(rng);
  const Field v = random_field(3, 1, 5, rng);
  const GaugeP g = solve_gauge_P(s.Omega0);
  const Varpi w = build_varpi(g.P, s, v);
  const CorrectorE e = solve_corrector_E(w, s);
  EXPECT_TRUE(e.converged);
  EXPECT_FALSE(e.diverged);
  EXPECT_LE(e.residual, 1e-6);
  EXPECT_LT(e.contraction, 0.5);

  // Halving the potentials shrinks E; reported by the CLI, checked loosely here.
  SchrodingerSystem h = s;
  h.Omega0 *= 0.5;
  h.Omega1 *= 0.5;
  for (auto& z : h.Z) z.Q *= 0.5;
  const Varpi wh = build_varpi(solve_gauge_P(h.Omega0).P, h, v);
  EXPECT_LT(solve_corrector_E(wh, h).linf, e.linf);
}

TEST(Conservation, ZeroSystem) {
  const SchrodingerSystem s = SchrodingerSystem::zero(2);
  const GaugeSolution g = solve_gauge_system(s, Field(2, 1, 0));
  EXPECT_EQ(g.residual_conservation, 0.0);
}

TEST(Conservation, SeededSolvedSystem) {
  std::mt19937_64 rng(9);
  SchrodingerSystem s = small_system(rng);
  const Field v = random_field(3, 1, 5, rng);
  // Choose g so that v solves the system exactly.
  s.g = Field(3, 1, 0);
  s.g = quarter(v) - model_rhs(s, v);
  ASSERT_LE(model_residual(s, v), 1e-12);
  const GaugeSolution g = solve_gauge_system(s, v);
  EXPECT_LE(g.residual_gauge, 1e-8);
  EXPECT_LE(g.residual_corrector, 1e-8);
  EXPECT_LE(g.residual_conservation, 1e-8);
  EXPECT_GT(g.min_singular_A, 0.5);
}

TEST(Conservation, UnsolvedVPropagates) {
  std::mt19937_64 rng(13);
  const SchrodingerSystem s = small_system(rng);
  const Field v = random_field(3, 1, 5, rng);
  ASSERT_GT(model_residual(s, v), 1e-3);
  const GaugeSolution g = solve_gauge_system(s, v);
  EXPECT_GT(g.conservation.residual, 1e-3);
  EXPECT_NEAR(g.conservation.residual, g.conservation.propagated, 1e-8);
  EXPECT_LE(g.conservation.consistency, 1e-8);
}

TEST(Conservation, HomogeneousInG) {
  std::mt19937_64 rng(21);
  SchrodingerSystem s = small_system(rng);
  const Field v = random_field(3, 1, 5, rng);
  const GaugeSolution a = solve_gauge_system(s, v);
  s.g *= 2.0;
  const GaugeSolution b = solve_gauge_system(s, 2.0 * v);
  EXPECT_NEAR(a.conservation.residual, b.conservation.residual, 1e-10);
  EXPECT_NEAR(a.residual_corrector, b.residual_corrector, 1e-12);
}

TEST(Euler, ExhalfHopf) {
  const EulerSystem& e = exhalf_pipeline().euler;
  EXPECT_LE(e.horizontality, 1e-10);
  EXPECT_LE(e.residual, 1e-8);
  EXPECT_LE(e.antisymmetry, 1e-10);
  EXPECT_LE(antisymmetry_defect(e.system.Omega0), 1e-12);
  EXPECT_LE(model_residual(e.system, e.v), 1e-10);
}

TEST(Euler, SphereGreatCircle) {
  const EulerSystem e = assemble_euler_system(*make_builtin("sphere_tangent:3"), great_circle3());
  EXPECT_LE(e.residual, 1e-8);
  EXPECT_LE(e.antisymmetry, 1e-10);
}

TEST(Euler, ConstantLoop) {
  Field u = Field::vector(4, 0);
  u.set_mode(0, 0, 1.0);
  const EulerSystem e = assemble_euler_system(*make_builtin("hopf_C2"), u);
  EXPECT_EQ(l2_norm(e.v), 0.0);
  EXPECT_LE(e.residual, 1e-14);
}

TEST(Euler, RefusesNonHorizontal) {
  // The Hopf fiber through (1, 0) is vertical.
  Field u = Field::vector(4, 1);
  u.set_mode(0, 1, 0.5);
  u.set_mode(1, 1, cd(0, -0.5));
  EXPECT_THROW(assemble_euler_system(*make_builtin("hopf_C2"), u), std::invalid_argument);
}

TEST(Pipeline, ExhalfGaugeCorrectorConservation) {
  const ExhalfPipeline& p = exhalf_pipeline();
  EXPECT_LE(p.sol.varpi.identity_residual, 1e-8);
  EXPECT_LE(p.sol.residual_gauge, 1e-6);
  EXPECT_LE(p.sol.residual_corrector, 1e-6);
  EXPECT_LE(p.sol.residual_conservation, 1e-6);
  EXPECT_LE(p.sol.gauge.rotation.orthogonality, 1e-8);
  EXPECT_GT(p.sol.gauge.rotation.min_det, 0.0);
  EXPECT_GT(p.sol.min_singular_A, 0.0);
  // The zero mode of omega~ is what the circle adds; it is not small here.
  EXPECT_GT(p.sol.zero_mode, 1.0);
  EXPECT_GT(p.sol.conservation.literal_residual, 1e-2);
  EXPECT_LT(p.seconds, 60.0);
}

TEST(Uniqueness, ConstantProjection) {
  Mat P = Mat::Zero(4, 4);
  P(0, 0) = P(2, 2) = 1.0;
  const Uniqueness r = uniqueness_operator_sigma_min(great_circle3(), *make_constant(P), 8);
  EXPECT_NEAR(r.sigma_min, 1.0, 1e-10);
  EXPECT_NEAR(r.sigma_max, 1.0, 1e-10);
  EXPECT_NEAR(r.energy, 0.0, 1e-20);
}

TEST(Uniqueness, FullRankTangent) {
  const Uniqueness r = uniqueness_operator(Field::identity(3, 0), 6);
  EXPECT_NEAR(r.sigma_min, 1.0, 1e-15);
  EXPECT_NEAR(r.sigma_max, 1.0, 1e-15);
}

TEST(Uniqueness, RotationInvariant) {
  const auto D = make_builtin("sphere_tangent:3");
  Field u = great_circle3().with_bandwidth(2);
  u.set_mode(2, 2, 0.1);
  const Field PT = projection_along(u, *D, 12);
  Mat R = (Mat(3, 3) << 0.3, -0.2, 0.4, 0.1, 0.0, -0.5, 0.2, 0.3, 1.0).finished();
  R = Mat(R.householderQr().householderQ());
  const Field RPT = mul(Field::constant(R), PT, Field::constant(R.transpose()));
  const Uniqueness a = uniqueness_operator(PT, 10);
  const Uniqueness b = uniqueness_operator(RPT, 10);
  EXPECT_NEAR(a.sigma_min, b.sigma_min, 1e-10);
  EXPECT_NEAR(a.energy, b.energy, 1e-10);
}

TEST(Uniqueness, ExhalfHasKernel) {
  // f = (-Delta)^{1/2} u lies in N while R f = u' lies in T, so the
  // operator has a kernel; the gauge energy 4 pi is far from small.
  const auto D = make_builtin("hopf_C2");
  const Field u = exhalf(1);
  const Uniqueness r = uniqueness_operator_sigma_min(u, *D, 16);
  EXPECT_NEAR(r.sigma_min, 0.0, 1e-12);
  EXPECT_NEAR(r.energy, 4.0 * M_PI, 1e-10);
  const Field PT = projection_along(u, *D, 16);
  const Field f = lap_pow(u, 0.5);
  const Field PN = Field::identity(4, 0) - PT;
  EXPECT_LE(l2_norm(mul(PT, f) + mul(PN, riesz(f))), 1e-12 * l2_norm(f));
}

TEST(Uniqueness, SweepStartsAtTrivialLoop) {
  const auto D = make_builtin("hopf_C2");
  const auto rows = uniqueness_sweep(exhalf(1), *D, 8, 5, 1.0);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_NEAR(rows.front().energy, 0.0, 1e-20);
  EXPECT_NEAR(rows.front().sigma_min, 1.0, 1e-10);
  for (size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i].energy, rows[i - 1].energy);
}
