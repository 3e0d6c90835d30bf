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
#include <vector>

#include "distributions.hpp"
#include "spectral.hpp"

namespace hh {

// Harmonic extension u~(r, theta) = sum_n c_n r^{|n|} e^{in theta}, evaluated
// through the mode calculus u~ = sum_{n>=0} c_n z^n + sum_{n>0} c_{-n} zbar^n.
class DiskField {
 public:
  DiskField(Field boundary, std::vector<double> radii, int angular_nodes);

  const Field& boundary() const { return u_; }
  const std::vector<double>& radii() const { return radii_; }
  int angular_nodes() const { return M_; }
  double theta(int j) const { return kTwoPi * j / M_; }

  Vec value(cd z) const;
  Vec dx1(cd z) const;
  Vec dx2(cd z) const;
  Vec dr(double r, double theta) const;
  Vec dtheta(double r, double theta) const;
  // Five-point Laplacian with step h, for the harmonicity probe.
  Vec laplacian_fd(cd z, double h) const;

 private:
  // h(w) = sum_{n>=1} c_n w^n and its derivative.
  Eigen::VectorXcd series(cd w) const;
  Eigen::VectorXcd series_derivative(cd w) const;

  Field u_;
  std::vector<double> radii_;
  int M_;
};

// Geometric toward r = 1: 1 - r_k = 0.9 * 2^{-k}, last point r = 1.
std::vector<double> geometric_radii(int count);
DiskField poisson_extend(const Field& u, int radial_points, int angular_nodes = 0);

// f = |d1 u~|^2 - |d2 u~|^2 - 2i <d1 u~, d2 u~>.
cd hopf_differential(const DiskField& F, cd z);
// |d f / d zbar| by central differences with step h.
double hopf_antiholomorphy(const DiskField& F, cd z, double h = 1e-4);

struct ConformalityReport {
  double boundary_im_z2f = 0.0;      // max |Im(z^2 f)| on r = 1
  double disk_max_f = 0.0;           // max |f| over the grid
  double tangent_radial = 0.0;       // max |P_T(u) d_r u~| on r = 1
  double normal_angular = 0.0;       // max |P_N(u) d_theta u~| on r = 1
  double holomorphy = 0.0;           // max |d f / d zbar| at interior nodes
  double horizontality_gate = 0.0;   // max |P_N(u) u'|
  double half_harmonic_gate = 0.0;   // max |P_T(u) (-Delta)^{1/2} u|
  bool gates_passed = false;
  bool passed = false;
};
ConformalityReport conformality_report(const DiskField& F, const ProjectionField& D,
                                       double tol = 1e-8, double gate_tol = 1e-6);

}  // namespace hh
