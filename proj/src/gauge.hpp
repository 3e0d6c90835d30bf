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
#include <string>
#include <vector>

#include "distributions.hpp"
#include "spectral.hpp"

namespace hh {

// Commutator entering the model system.  The term is weight * K(Q, x) with
// x = v, or x = R v when riesz_input is set, and K one of
//   T:  T(Q, x)
//   RS: R S(Q, x)
//   F:  F(Q, x)
enum class ZKind { T, RS, F };

struct ZTerm {
  ZKind kind = ZKind::T;
  Field Q;  // m x m
  double weight = 1.0;
  bool riesz_input = false;
  std::string label;
};

std::string to_string(ZKind k);

// (-Delta)^{1/4} v = Omega0 v + Omega1 v + Z(Q, v) + g on the circle.
struct SchrodingerSystem {
  Field Omega0;  // antisymmetric m x m
  Field Omega1;  // m x m
  std::vector<ZTerm> Z;
  Field g;  // m x 1

  int m() const { return Omega0.rows(); }
  static SchrodingerSystem zero(int m);
};

Field apply_Z(const SchrodingerSystem& sys, const Field& v);
Field model_rhs(const SchrodingerSystem& sys, const Field& v);
// Relative residual of the model system for the given v.
double model_residual(const SchrodingerSystem& sys, const Field& v);
// Largest |A(theta) + A(theta)^T| over a fine grid.
double antisymmetry_defect(const Field& A);
// max over nodes of |A^T A - Id| and min det A.
struct RotationDefect {
  double orthogonality = 0.0;
  double min_det = 0.0;
  double min_singular = 0.0;
};
RotationDefect rotation_defect(const Field& A);

// P^T (-Delta)^{1/4} P - ((-Delta)^{1/4} P^T) P, with P^{-1} = P^T.
Field gauge_lhs(const Field& P);
double gauge_residual(const Field& P, const Field& Omega0);

struct GaugeOptions {
  double tol = 1e-8;         // relative residual
  int max_iter = 4000;
  double smallness = 0.05;   // threshold on |Omega0|_L2
  int N = 0;                 // bandwidth of P; 0 picks max(24, 2 N(Omega0) + 16)
  int restarts = 2;
  std::uint64_t seed = 1;
};

struct GaugeP {
  Field P;
  double residual = 0.0;  // relative
  double initial_residual = 0.0;
  double omega_l2 = 0.0;
  // The linearization at Id is 2 D Y, which has no zero mode, so data with
  // a large mean are out of reach; reported, not enforced.
  double omega_mean = 0.0;
  bool small_data = true;
  bool converged = false;
  int iterations = 0;
  int restarts_used = 0;
  RotationDefect rotation;
  std::vector<double> history;
};

// Collocation on 2N+1 nodes. Gauss-Newton with polar retraction and Armijo
// backtracking, continued in t from t Omega0 at t = 0 up to t = 1; a failed
// step halves the increment in t and a stall triggers a random restart.
// Node 0 is pinned to remove the constant-rotation null space.
GaugeP solve_gauge_P(const Field& Omega0, const GaugeOptions& opts = {});

// Everything built from P and the system that Step 2 and Step 3 reuse.
struct Varpi {
  Field P, Pinv;
  Field varpi;   // P Omega1 P^-1 + A_Z(P,Q) P^-1 + P Omega0 P^-1 - (D P) P^-1
  Field A_Z;     // sum of the potentials of the Z decompositions
  Field J_TZ;    // T(P, v) + J_Z(P, Q, v)
  Field g_eff;   // g plus the model residual of v
  double l21_proxy = 0.0;
  double identity_residual = 0.0;  // D[Pv] = varpi (Pv) + J_TZ + P g_eff
  double model_residual = 0.0;
  std::vector<double> decomposition_residuals;  // one per Z term
};

Varpi build_varpi(const Field& P, const SchrodingerSystem& sys, const Field& v);

// omega(M, P, Q) of the decomposition M J_TZ = omega v + G.
Field omega_of(const Field& M, const Varpi& w, const SchrodingerSystem& sys);
// omega~(M) = M varpi + omega(M) P^-1.
Field omega_tilde(const Field& M, const Varpi& w, const SchrodingerSystem& sys);

struct CorrectorOptions {
  double tol = 1e-10;
  int max_iter = 200;
  int N = 0;  // bandwidth of E; 0 picks the bandwidth of varpi plus 4
  // Solve the linear equation directly when the iteration does not contract.
  bool direct_fallback = true;
};

// On the circle D E has no zero mode, so E is taken zero-mean and solves
// D E = omega~(Id + E) - mean(omega~(Id + E)); the constant left over is
// zero_mode and enters the conservation law as zero_mode P v.
struct CorrectorE {
  Field E;
  Field zero_mode;
  double residual = 0.0;          // relative, zero-mean part of the corrector equation
  double literal_residual = 0.0;  // relative, corrector equation including the zero mode
  double contraction = 0.0;
  double linf = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  bool direct = false;
  std::vector<double> history;
};

CorrectorE solve_corrector_E(const Varpi& w, const SchrodingerSystem& sys,
                             const CorrectorOptions& opts = {});

struct Conservation {
  Field A;
  Field lhs, J, Ag;
  Field zero_mode_term;  // mean(omega~) P v, part of J
  double residual = 0.0;
  double literal_residual = 0.0;  // without the zero-mode term
  double propagated = 0.0;   // predicted residual from the model and corrector defects
  double consistency = 0.0;  // |actual defect - predicted defect| / |lhs|
  double hardy_ratio = 0.0;  // |J|_H1proxy / (|B|_{H^1/2} |v|_L2)
};

Conservation verify_conservation(const Field& E, const Varpi& w, const SchrodingerSystem& sys,
                                 const Field& v);

// Full chain: gauge, varpi, corrector, conservation law.
struct GaugeSolution {
  GaugeP gauge;
  Varpi varpi;
  CorrectorE corrector;
  Conservation conservation;
  double residual_gauge = 0.0;
  double residual_corrector = 0.0;
  double residual_conservation = 0.0;
  double zero_mode = 0.0;
  double min_singular_A = 0.0;
};

GaugeSolution solve_gauge_system(const SchrodingerSystem& sys, const Field& v,
                                 const GaugeOptions& gopts = {},
                                 const CorrectorOptions& copts = {});

// f -> (P_T + P_N R) f on zero-mean fields of bandwidth N.
struct Uniqueness {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double energy = 0.0;  // int |(-Delta)^{1/4} P_T(u)|^2
};

Field projection_along(const Field& u, const ProjectionField& D, int N);
Uniqueness uniqueness_operator(const Field& PT, int N);
Uniqueness uniqueness_operator_sigma_min(const Field& u, const ProjectionField& D, int N,
                                         int N_projection = 0);

// Loops u_s(theta) = u(s sin theta), s in [0, s_max], contract the loop onto
// the arc through u(0) without leaving its image.
struct SweepRow {
  double s = 0.0;
  double energy = 0.0;
  double sigma_min = 0.0;
};
std::vector<SweepRow> uniqueness_sweep(const Field& u, const ProjectionField& D, int N,
                                       int samples, double s_max);

// Euler system of a horizontal half-harmonic loop in the unknown
// v = (P_T D u, R P_N D u) with D = (-Delta)^{1/4}, w = D u, G = D[P_T]:
//   D v = Omega~ + Omega1 v + Omega v + c,  Omega~ = (C - 2 Dm) v,
//   C v  = (T(P_T, w), R S(P_N, w)),
//   Dm v = -1/2 (F(G, P_N w), F(G, R v1)),
//   Omega = [[W, -R G], [R G, W]],  W = P_T G P_N - P_N G P_T,
//   Omega1 = [[-G - W, 0], [0, -G - W]],
// and c the constants the circle adds to the line version.
struct EulerSystem {
  SchrodingerSystem system;  // Omega0 = Omega - mean, Omega1 absorbs the mean
  Field v;
  Field Omega, Omega1, Omega_tilde, Cv, Dv, mean_correction;
  double horizontality = 0.0;
  double half_harmonic = 0.0;
  double residual = 0.0;          // Euler system with the circle constants
  double residual_no_mean = 0.0;  // same without them
  double antisymmetry = 0.0;
  double literal_C_residual = 0.0;  // C with the literal entry signs
  double omega0_l2 = 0.0;
};

EulerSystem assemble_euler_system(const ProjectionField& D, const Field& u,
                                  double horizontality_tol = 1e-8, int N_projection = 0);

}  // namespace hh
