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

#include <functional>
#include <vector>

#include "distributions.hpp"

namespace hh {

struct GeodesicState {
  Vec u;
  Vec xi;
};

struct GeodesicTrajectory {
  double h = 0.0;
  std::vector<double> theta;
  std::vector<GeodesicState> states;
  std::vector<double> hamiltonian;
  bool truncated = false;  // stopped on the singular locus

  double max_drift() const;
  double closure_defect() const;
};

// H = <xi, P_T(u) xi> / 2.
double hamiltonian(const ProjectionField& D, const GeodesicState& s);
// du = P_T(u) xi, dxi_k = -<xi, d_k P_T(u) xi> / 2.
GeodesicState geodesic_rhs(const ProjectionField& D, const GeodesicState& s);
GeodesicTrajectory integrate(const ProjectionField& D, const GeodesicState& s0,
                             double span, double h);
double horizontality_defect(const ProjectionField& D, const GeodesicTrajectory& t);

// max |P_T(u) u''| with u'' from second differences of the samples.
std::vector<double> integrable_reduction_check(const ProjectionField& D,
                                               const GeodesicTrajectory& traj);

// Maps on a square patch [-a, a]^2 sampled on an (n+1) x (n+1) grid.
struct PatchMap {
  int n = 0;
  double half_width = 0.0;
  std::vector<Vec> values;  // row-major, index i * (n + 1) + j for (x_i, y_j)

  double h() const { return 2.0 * half_width / n; }
  double x(int i) const { return -half_width + i * h(); }
  const Vec& at(int i, int j) const { return values[i * (n + 1) + j]; }
};
PatchMap sample_patch(const std::function<Vec(double, double)>& f, int n, double half_width);

struct Rewrite2DReport {
  double horizontality_gate = 0.0;  // max |P_N(u) grad u|
  double harmonic_gate = 0.0;       // max |P_T(u) Delta u|
  double antisymmetry = 0.0;        // max |Omega + Omega^T|
  double residual = 0.0;            // max |-Delta u - Omega . grad u|
  // Same with Omega = P_N grad P_T - (P_N grad P_T)^T, the opposite sign.
  double opposite_sign_residual = 0.0;
  bool gates_passed = false;
};
// Second-order central differences at interior nodes.  Throws when a gate
// exceeds gate_tol.
Rewrite2DReport verify_2d_rewrite(const ProjectionField& D, const PatchMap& u,
                                  double gate_tol = 1e-2);

struct Variational2DReport {
  double first_equation = 0.0;   // max |d_l u - P_T(u) xi^l|
  double second_equation = 0.0;  // max |div xi_k + (1/2) sum_l <xi^l, d_k P_T xi^l>|
  double antisymmetry = 0.0;     // max |Omega^{ik}_l + Omega^{ki}_l|
  double schrodinger = 0.0;      // max |-Delta u - Omega_xi . grad u|
};
Variational2DReport variational_2d_residual(const ProjectionField& D, const PatchMap& u,
                                            const PatchMap& xi1, const PatchMap& xi2);

}  // namespace hh
