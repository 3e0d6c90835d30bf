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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "halfharmonic.hpp"

using namespace hh;

namespace {

Field great_circle3(int N = 1) {
  Field u = Field::vector(3, N);
  u.set_mode(0, 1, 0.5);
  u.set_mode(1, 1, cd(0, -0.5));
  return u;
}

// Figure-eight horizontal loop for the Heisenberg distribution:
// x = sin, y = sin cos, t = (cos - cos^3 / 3) / 2 closes up.
Field heisenberg_lemniscate() {
  Field u = Field::vector(3, 3);
  u.set_mode(0, 1, cd(0, -0.5));
  u.set_mode(1, 2, cd(0, -0.25));
  // (cos - cos^3/3)/2 = (3/4 cos - 1/12 cos 3) / 2
  u.set_mode(2, 1, 0.5 * 0.375);
  u.set_mode(2, 3, -0.5 * (1.0 / 24.0));
  return u;
}

}  // namespace

TEST(HalfHarmonic, ExhalfEnergyAndLagrangian) {
  const Field u = exhalf();
  EXPECT_NEAR(half_energy(u), kTwoPi, 1e-12);
  auto D = make_builtin("hopf_C2");
  const ConstrainedPair p = make_pair(u, ddtheta(u), *D);
  EXPECT_LT(p.pairing_residual, 1e-14);
  EXPECT_NEAR(lagrangian_L12(p, *D), -kPi, 1e-12);
}

TEST(HalfHarmonic, LagrangianIsMinusHalfEnergyOnHorizontalLoops) {
  auto S = make_builtin("sphere_tangent:3");
  const Field u = great_circle3(2);
  EXPECT_NEAR(lagrangian_L12(make_pair(u, ddtheta(u), *S), *S), -0.5 * half_energy(u), 1e-12);
  auto H = make_builtin("heisenberg");
  const Field l = heisenberg_lemniscate();
  EXPECT_NEAR(lagrangian_L12(make_pair(l, ddtheta(l), *H), *H), -0.5 * half_energy(l), 1e-10);
}

TEST(HalfHarmonic, ConstantLoopHasZeroLagrangianAndResiduals) {
  auto S = make_builtin("sphere_tangent:3");
  Field u = Field::vector(3, 2);
  u.set_mode(2, 0, 1.0);
  const ConstrainedPair p = make_pair(u, Field::vector(3, 2), *S);
  EXPECT_EQ(lagrangian_L12(p, *S), 0.0);
  EXPECT_LT(el_residuals(p, *S).max_residual(), 1e-14);
}

TEST(HalfHarmonic, NormalPerturbationOnlyTouchesThirdIntegral) {
  auto D = make_builtin("hopf_C2");
  const Field u = exhalf();
  const ConstrainedPair p = make_pair(u, ddtheta(u), *D);
  std::mt19937_64 rng(7);
  const Field r = random_field(4, 1, 3, rng);
  // P_N(u) r computed pointwise; P_N(u) has bandwidth 2 on exhalf.
  const Field PN = map_pointwise(u, 2, 64, [&](const Vec& z) {
    Mat a = D->PN(z);
    return Vec(Eigen::Map<const Vec>(Mat(a.transpose()).data(), 16));
  }, 4, 4);
  const Field eta = mul(PN, r);
  const L12Terms a = lagrangian_terms(p, *D);
  const L12Terms b = lagrangian_terms(make_pair(u, ddtheta(u) + eta, *D), *D);
  EXPECT_NEAR(a.tangent_energy, b.tangent_energy, 1e-12);
  EXPECT_NEAR(a.tangent_cross, b.tangent_cross, 1e-12);
  EXPECT_NEAR(b.normal_cross - a.normal_cross, b.value() - a.value(), 1e-12);
}

TEST(HalfHarmonic, FirstVariationVanishesAtExhalf) {
  auto D = make_builtin("hopf_C2");
  const Field u = exhalf();
  const ConstrainedPair p = make_pair(u, ddtheta(u), *D);
  HalfHarmonicOptions o;
  o.work_N = 24;
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 rng(split_seed(11, trial));
    const Field w = admissible_direction(u, *D, random_field(4, 1, 4, rng, 1.5), o);
    const Field eta = random_field(4, 1, 4, rng, 1.5);
    const FirstVariation v = first_variation(p, *D, w, eta, o);
    EXPECT_LT(std::abs(v.d_xi), 1e-8);
    EXPECT_LT(std::abs(v.d_u), 1e-8) << trial;
  }
  const FirstVariation z = first_variation(p, *D, Field::vector(4, 1), Field::vector(4, 1), o);
  EXPECT_EQ(z.d_xi, 0.0);
  EXPECT_EQ(z.d_u, 0.0);
}

TEST(HalfHarmonic, DilationIsNotAdmissibleOnHopf) {
  auto D = make_builtin("hopf_C2");
  const Field u = exhalf();
  const ConstrainedPair p = make_pair(u, ddtheta(u), *D);
  EXPECT_TRUE(radius_constraint_active(u, *D, RadiusMode::Auto));
  EXPECT_THROW(first_variation(p, *D, u, Field::vector(4, 1)), std::invalid_argument);
  HalfHarmonicOptions off;
  off.radius = RadiusMode::Off;
  // Without the radius constraint the dilation passes the gate and the
  // pair is not critical along it.
  const FirstVariation v = first_variation(p, *D, u, Field::vector(4, 1), off);
  EXPECT_NEAR(v.d_u, -kTwoPi, 1e-10);
}

TEST(HalfHarmonic, FirstVariationMatchesFiniteDifferences) {
  auto D = make_builtin("hopf_C2");
  std::mt19937_64 rng(3);
  const Field u = exhalf(3) + 0.1 * random_field(4, 1, 3, rng, 2.0);
  const Field xi = ddtheta(u) + 0.1 * random_field(4, 1, 3, rng, 1.0);
  const Field w = random_field(4, 1, 3, rng, 1.5);
  const Field eta = random_field(4, 1, 3, rng, 1.5);
  HalfHarmonicOptions o;
  o.work_N = 40;
  o.radius = RadiusMode::Off;
  const ConstrainedPair p = make_pair(u, xi, *D, o);
  const FirstVariation v = first_variation(p, *D, w, eta, o, 1e6);
  auto L = [&](double t, bool along_u) {
    return along_u ? lagrangian_L12(make_pair(u + t * w, xi, *D, o), *D, o)
                   : lagrangian_L12(make_pair(u, xi + t * eta, *D, o), *D, o);
  };
  for (bool along_u : {true, false}) {
    const double exact = along_u ? v.d_u : v.d_xi;
    double prev = 0.0;
    for (double t : {1e-2, 5e-3}) {
      const double err = std::abs((L(t, along_u) - L(-t, along_u)) / (2 * t) - exact);
      if (prev > 0.0 && prev > 1e-12) EXPECT_NEAR(prev / err, 4.0, 0.5);
      prev = err;
    }
  }
}

TEST(HalfHarmonic, ExhalfELResiduals) {
  auto D = make_builtin("hopf_C2");
  const Field u = exhalf();
  const ELReport r = el_residuals(make_pair(u, ddtheta(u), *D), *D);
  EXPECT_LT(r.half_harmonic, 1e-12);
  EXPECT_LT(r.max_residual(), 1e-8);
  EXPECT_LT(r.omega_antisymmetry, 1e-12);
  EXPECT_LT(r.Omega_antisymmetry, 1e-12);
  EXPECT_NEAR(r.radius_multiplier, -1.0, 1e-10);
  EXPECT_LT(r.lambda.norm(), 1e-10);
  // Without the radius multiplier, or with the opposite sign in omega, the
  // reformulated equations fail by O(1).
  EXPECT_GT(r.multiplier_fit_no_radius, 0.1);
  EXPECT_GT(r.riesz_form_alt_sign, 0.1);
}

TEST(HalfHarmonic, RandomPairIsNotCritical) {
  auto D = make_builtin("hopf_C2");
  std::mt19937_64 rng(5);
  const Field u = exhalf(4) + 0.3 * random_field(4, 1, 4, rng, 1.0);
  const Field xi = random_field(4, 1, 4, rng, 1.0);
  const ELReport r = el_residuals(make_pair(u, xi, *D), *D);
  EXPECT_GT(r.el_tangent, 1e-3);
  EXPECT_GT(r.horizontality, 1e-3);
  EXPECT_GT(r.half_harmonic, 1e-3);
  EXPECT_LT(r.riesz_form_consistency, 1e-10);
  EXPECT_LT(r.Omega_antisymmetry, 1e-12);
}

TEST(HalfHarmonic, SolverAcceptsExhalfImmediately) {
  auto D = make_builtin("hopf_C2");
  const SolveResult s = solve(exhalf(4), *D);
  EXPECT_TRUE(s.converged);
  EXPECT_EQ(s.outer_iterations, 0);
  EXPECT_LT(s.half_harmonic, 1e-10);
}

TEST(HalfHarmonic, SolverRecoversExhalfFromPerturbation) {
  auto D = make_builtin("hopf_C2");
  const Field init = perturbed_exhalf(0.05, 1, 6);
  EXPECT_GT(half_harmonic_residual(init, *D), 1e-2);
  SolveOptions o;
  o.tol = 1e-6;
  const SolveResult s = solve(init, *D, o);
  EXPECT_FALSE(s.degenerate);
  EXPECT_LT(s.half_harmonic, 1e-4);
  const Alignment a = align_to_exhalf(s.pair.u);
  EXPECT_LT(a.distance, 1e-3);
}

TEST(HalfHarmonic, SolverFindsGreatCircleOnSphere) {
  auto S = make_builtin("sphere_tangent:3");
  std::mt19937_64 rng(9);
  Field p = random_field(3, 1, 5, rng, 2.0, true);
  for (int k = 0; k < 3; ++k)
    for (int n = 0; n <= 5; n += 2) p.set_mode(k, n, 0.0);
  const Field init = great_circle3(5) + (0.05 / linf_norm(p)) * p;
  const SolveResult s = solve(init, *S);
  EXPECT_TRUE(s.converged);
  EXPECT_LT(s.half_harmonic, 1e-6);
  EXPECT_NEAR(s.energy, kTwoPi, 1e-5);
}

TEST(HalfHarmonic, TransportIdentitiesAtExhalf) {
  auto D = make_builtin("hopf_C2");
  const Field u = exhalf();
  for (int trial = 0; trial < 3; ++trial) {
    std::mt19937_64 rng(split_seed(21, trial));
    const Field v = random_field(2, 1, 3, rng, 1.0);
    const TransportReport r = variation_transport(u, *D, v);
    EXPECT_LT(r.periodicity, 1e-8);
    EXPECT_LT(r.tangent_block, 1e-10);
    EXPECT_LT(r.tangent_drift, 1e-8);
    EXPECT_LT(r.frame_form, 1e-8);
    EXPECT_LT(r.normal_frame, 1e-8);
    EXPECT_LT(r.normal_constraint, 1e-8);
    EXPECT_LT(r.radial, 1e-8);
    EXPECT_LT(std::abs(r.pairing), 1e-6);
  }
}

TEST(HalfHarmonic, TransportSurvivesFrameJumps) {
  // The Gram-Schmidt frame of sphere_tangent jumps near theta = 0 on this loop.
  auto S = make_sphere_tangent(3);
  const Field u = great_circle3(1);
  for (int trial = 0; trial < 4; ++trial) {
    std::mt19937_64 rng(split_seed(33, trial));
    const TransportReport r = variation_transport(u, *S, random_field(2, 1, 3, rng));
    EXPECT_LT(r.periodicity, 1e-8);
    EXPECT_LT(r.normal_constraint, 1e-8);
    EXPECT_LT(r.radial, 1e-8);
    EXPECT_LT(std::abs(r.pairing), 1e-6);
  }
}

TEST(HalfHarmonic, TransportConstantDistribution) {
  Mat P0 = Mat::Zero(3, 3);
  P0(0, 0) = P0(1, 1) = 1.0;
  auto D = make_constant(P0);
  Field u = Field::vector(3, 1);
  u.set_mode(0, 1, 0.5);
  u.set_mode(1, 1, cd(0, -0.5));
  const TransportReport r = variation_transport(u, *D, Field::vector(2, 1));
  EXPECT_LT(l2_norm(r.w.without_mean()), 1e-12);
  EXPECT_LT(r.normal_constraint, 1e-12);
}

TEST(HalfHarmonic, TransportPairingNonzeroOffCriticalLoops) {
  auto H = make_builtin("heisenberg");
  const Field l = heisenberg_lemniscate();
  EXPECT_LT(el_residuals(make_pair(l, ddtheta(l), *H), *H).horizontality, 1e-12);
  std::mt19937_64 rng(4);
  const TransportReport r = variation_transport(l, *H, random_field(2, 1, 3, rng));
  EXPECT_LT(r.normal_constraint, 1e-8);
  EXPECT_GT(std::abs(r.pairing), 1e-3);
}
