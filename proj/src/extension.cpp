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

#include "extension.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hh {

// For a real field u~ = c_0 + 2 Re h(z) with h(z) = sum_{n>=1} c_n z^n, so
// d_x u~ = 2 Re h'(z) and d_y u~ = -2 Im h'(z).
DiskField::DiskField(Field boundary, std::vector<double> radii, int angular_nodes)
    : u_(std::move(boundary)), radii_(std::move(radii)), M_(angular_nodes) {
  if (M_ < 2 * u_.N() + 1) throw std::invalid_argument("angular grid too coarse");
}

Eigen::VectorXcd DiskField::series(cd w) const {
  Eigen::VectorXcd s = Eigen::VectorXcd::Zero(u_.m());
  for (int n = u_.N(); n >= 1; --n) s = (s + u_.coeffs().col(u_.N() + n)) * w;
  return s;
}

Eigen::VectorXcd DiskField::series_derivative(cd w) const {
  Eigen::VectorXcd s = Eigen::VectorXcd::Zero(u_.m());
  for (int n = u_.N(); n >= 1; --n) {
    s = s * w + static_cast<double>(n) * u_.coeffs().col(u_.N() + n);
  }
  return s;
}

Vec DiskField::value(cd z) const {
  return u_.coeffs().col(u_.N()).real() + 2.0 * series(z).real();
}

Vec DiskField::dx1(cd z) const { return 2.0 * series_derivative(z).real(); }

Vec DiskField::dx2(cd z) const { return -2.0 * series_derivative(z).imag(); }

Vec DiskField::dr(double r, double theta) const {
  return 2.0 * (series_derivative(std::polar(r, theta)) * std::polar(1.0, theta)).real();
}

Vec DiskField::dtheta(double r, double theta) const {
  const cd z = std::polar(r, theta);
  return 2.0 * (series_derivative(z) * (cd(0.0, 1.0) * z)).real();
}

Vec DiskField::laplacian_fd(cd z, double h) const {
  return (value(z + h) + value(z - h) + value(z + cd(0, h)) + value(z - cd(0, h)) -
          4.0 * value(z)) /
         (h * h);
}

std::vector<double> geometric_radii(int count) {
  if (count < 1) throw std::invalid_argument("need at least one radius");
  std::vector<double> r;
  for (int k = 0; k + 1 < count; ++k) r.push_back(1.0 - 0.9 * std::pow(0.5, k));
  r.push_back(1.0);
  return r;
}

DiskField poisson_extend(const Field& u, int radial_points, int angular_nodes) {
  if (angular_nodes <= 0) angular_nodes = fft_size(std::max(4 * u.N() + 1, 64));
  return DiskField(u, geometric_radii(radial_points), angular_nodes);
}

cd hopf_differential(const DiskField& F, cd z) {
  const Vec a = F.dx1(z), b = F.dx2(z);
  return {a.squaredNorm() - b.squaredNorm(), -2.0 * a.dot(b)};
}

double hopf_antiholomorphy(const DiskField& F, cd z, double h) {
  const cd fx = (hopf_differential(F, z + h) - hopf_differential(F, z - h)) / (2.0 * h);
  const cd fy =
      (hopf_differential(F, z + cd(0, h)) - hopf_differential(F, z - cd(0, h))) / (2.0 * h);
  return std::abs(0.5 * (fx + cd(0) * fy));
}

ConformalityReport conformality_report(const DiskField& F, const ProjectionField& D,
                                       double tol, double gate_tol) {
  ConformalityReport r;
  const Field& u = F.boundary();
  const GridField ug = u.grid(F.angular_nodes());
  const GridField dug = ddtheta(u).grid(F.angular_nodes());
  const GridField hg = lap_pow(u, 0.5).grid(F.angular_nodes());
  for (int j = 0; j < F.angular_nodes(); ++j) {
    const double th = F.theta(j);
    const Vec z = ug.values.col(j);
    const Mat PT = D.PT(z);
    const Mat PN = Mat::Identity(D.m(), D.m()) - PT;
    r.horizontality_gate = std::max(r.horizontality_gate, (PN * dug.values.col(j)).norm());
    r.half_harmonic_gate = std::max(r.half_harmonic_gate, (PT * hg.values.col(j)).norm());
    const cd w = std::polar(1.0, th);
    r.boundary_im_z2f = std::max(r.boundary_im_z2f, std::abs((w * w * hopf_differential(F, w)).imag()));
    r.tangent_radial = std::max(r.tangent_radial, (PT * F.dr(1.0, th)).norm());
    r.normal_angular = std::max(r.normal_angular, (PN * F.dtheta(1.0, th)).norm());
    for (double rad : F.radii()) {
      const cd zz = std::polar(rad, th);
      r.disk_max_f = std::max(r.disk_max_f, std::abs(hopf_differential(F, zz)));
      if (rad < 0.99) r.holomorphy = std::max(r.holomorphy, hopf_antiholomorphy(F, zz));
    }
  }
  r.gates_passed = r.horizontality_gate <= gate_tol && r.half_harmonic_gate <= gate_tol;
  r.passed = r.gates_passed && r.boundary_im_z2f <= tol && r.disk_max_f <= tol &&
             r.tangent_radial <= tol && r.normal_angular <= tol;
  return r;
}

}  // namespace hh
