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

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "distributions.hpp"
#include "spectral.hpp"

namespace hh {

// (e^{i theta}, e^{-i theta}) / sqrt(2) written in R^4 as (x1, y1, x2, y2),
// padded to bandwidth N.
Field exhalf(int N = 1);
// exhalf plus eps times an odd-mode perturbation normalized to unit sup norm.
Field perturbed_exhalf(double eps, std::uint64_t seed, int N = 8);
// Integral of |(-Delta)^{1/4} u|^2.
double half_energy(const Field& u);

// Horizontal loops of a dilation-invariant distribution can be rescaled, so
// the half energy has no nonconstant critical points unless the radius
// (1/2pi) int |u|^2 is held fixed.  Auto turns the constraint on exactly when
// P_T(2z) = P_T(z) along the loop.
enum class RadiusMode { Auto, On, Off };

struct HalfHarmonicOptions {
  int work_N = 0;  // bandwidth of compositions P(u) x; 0 picks 4 max(N) + 8
  int nodes = 0;   // quadrature nodes; 0 picks fft_size(4 work_N + 1)
  RadiusMode radius = RadiusMode::Auto;
};

bool radius_constraint_active(const Field& u, const ProjectionField& D,
                              RadiusMode mode);

struct ConstrainedPair {
  Field u;
  Field xi;
  double pairing_residual = 0.0;  // |int P_N(u) u'|
  double tangent_xi_norm = 0.0;   // |(-Delta)_0^{-1/4} P_T(u) xi|_L2
  double tangent_du_norm = 0.0;   // |(-Delta)_0^{-1/4} P_T(u) u'|_L2
};

ConstrainedPair make_pair(const Field& u, const Field& xi, const ProjectionField& D,
                          const HalfHarmonicOptions& opts = {});

struct L12Terms {
  double tangent_energy = 0.0;  // |D^- P_T xi|^2 / 2
  double tangent_cross = 0.0;   // -<D^- P_T xi, D^- P_T u'>
  double normal_cross = 0.0;    // -<D^- P_N xi, D^- P_N u'>
  double value() const { return tangent_energy + tangent_cross + normal_cross; }
};

L12Terms lagrangian_terms(const ConstrainedPair& p, const ProjectionField& D,
                          const HalfHarmonicOptions& opts = {});
double lagrangian_L12(const ConstrainedPair& p, const ProjectionField& D,
                      const HalfHarmonicOptions& opts = {});

// int P_N(u) w' + d_w P_N(u) u', the linearized membership constraint.
Vec linearized_constraint(const Field& u, const ProjectionField& D, const Field& w,
                          const HalfHarmonicOptions& opts = {});

// Projects `raw` onto the admissible directions at u: the linearized
// constraint and, when active, int <u, w> = 0.  The correction lives in the
// constant and first two Fourier modes.
Field admissible_direction(const Field& u, const ProjectionField& D, const Field& raw,
                           const HalfHarmonicOptions& opts = {});

struct FirstVariation {
  double d_xi = 0.0;
  double d_u = 0.0;
  double gate = 0.0;  // admissibility residual of w
};

// Throws std::invalid_argument when w fails the admissibility gate.
FirstVariation first_variation(const ConstrainedPair& p, const ProjectionField& D,
                               const Field& w, const Field& eta,
                               const HalfHarmonicOptions& opts = {},
                               double gate_tol = 1e-8);

struct ELReport {
  double el_tangent = 0.0;
  double el_normal = 0.0;
  double horizontality = 0.0;
  double xi_drift = 0.0;
  double multiplier_fit = 0.0;
  double multiplier_fit_no_radius = 0.0;  // lambda alone, no radius multiplier
  double riesz_form = 0.0;
  double riesz_form_alt_sign = 0.0;  // omega with (-Delta_0)^{-1/2} xi terms
  double projected_riesz_form = 0.0;
  double projected_normal = 0.0;
  double riesz_form_consistency = 0.0;  // |P_T r - r_T|
  double omega_antisymmetry = 0.0;
  double Omega_antisymmetry = 0.0;
  double half_harmonic = 0.0;  // |P_T(u) (-Delta)^{1/2} u|
  Vec lambda;
  double radius_multiplier = 0.0;
  bool radius_constraint = false;

  double max_residual() const;
};

ELReport el_residuals(const ConstrainedPair& p, const ProjectionField& D,
                      const HalfHarmonicOptions& opts = {});

// |P_T(u) (-Delta)^{1/2} u| in L2.
double half_harmonic_residual(const Field& u, const ProjectionField& D);

// Loops with u(theta + pi) = -u(theta) carry only odd modes.  When
// P_T(-z) = P_T(z) this class is invariant, critical points inside it are
// critical outright, and at fixed radius great circles minimize the energy
// there; in the full space they are saddles and descent drifts to constant
// loops.  Auto restricts to the class when the initial loop lies in it.
enum class SymmetryMode { Auto, Antipodal, None };

bool antipodal_class_active(const Field& u, const ProjectionField& D, SymmetryMode mode);

struct SolveOptions {
  std::vector<double> penalties{1.0, 10.0, 100.0, 1000.0};
  int updates_per_penalty = 6;
  double tol = 1e-6;
  double radius = 1.0;
  double degenerate_gate = 1e-3;
  int max_lm_evaluations = 400;
  SymmetryMode symmetry = SymmetryMode::Auto;
  HalfHarmonicOptions hh;
};

struct SolveHistoryRow {
  int outer = 0;
  double penalty = 0.0;
  double energy = 0.0;
  double violation = 0.0;
  double half_harmonic = 0.0;
};

struct SolveResult {
  ConstrainedPair pair;
  ELReport report;
  double half_harmonic = 0.0;
  double violation = 0.0;
  double energy = 0.0;
  int outer_iterations = 0;
  bool converged = false;
  bool stalled = false;
  bool degenerate = false;
  bool constant_loop = false;  // collapsed to a point; never counted as converged
  std::vector<SolveHistoryRow> history;
};

// Augmented-Lagrangian minimization of the half energy over loops of
// bandwidth u_init.N() with grid-sampled horizontality P_N(u) u' = 0.
SolveResult solve(const Field& u_init, const ProjectionField& D,
                  const SolveOptions& opts = {});

struct Alignment {
  double distance = 0.0;  // L2 distance after alignment
  std::complex<double> mobius_a{0.0, 0.0};
  Eigen::Matrix2cd unitary = Eigen::Matrix2cd::Identity();
};

// Distance from a loop in C^2 = R^4 to exhalf, minimized over Mobius
// reparametrizations and the unitary symmetries of hopf_C2.
Alignment align_to_exhalf(const Field& u);

using FrameFn = std::function<Mat(const Vec&)>;

struct TransportOptions {
  int steps = 1024;
  double frame_tol = 1e-10;
  HalfHarmonicOptions hh;
};

struct TransportReport {
  Field w;
  double frame_orthonormality = 0.0;
  double control_fit = 0.0;  // |u' - sum alpha_i e_i|
  double periodicity = 0.0;
  double tangent_block = 0.0;
  double tangent_drift = 0.0;
  double frame_form = 0.0;
  double normal_frame = 0.0;  // |d_w P_T u' - sum alpha_i P_N d_w e_i|
  double normal_constraint = 0.0;        // |d_w P_T u' - P_N w'|
  double linearized_constraint = 0.0;
  double radial = 0.0;  // |int <u, w>|
  double pairing = 0.0;
  double pairing_relative = 0.0;
};

// Builds the variation w' = sum v_i e_i(u) + sum alpha_i d_w e_i(u) from the
// controls v (an n-component field), adjusting w(0) and the low modes of v so
// that w closes up.  The frame (D.frame unless given) only seeds e_i: along
// the loop it is aligned step by step and its holonomy spread evenly, so e_i is
// smooth and periodic even where the seed jumps; off the loop e_i extends as
// P_T e_i normalized.  Throws std::invalid_argument if the seed is not
// orthonormal to frame_tol or the frame cannot close up (orientation flips).
TransportReport variation_transport(const Field& u, const ProjectionField& D,
                                    const Field& controls,
                                    const TransportOptions& opts = {},
                                    const FrameFn& frame = nullptr);

}  // namespace hh
