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

#include "geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hh {

double GeodesicTrajectory::max_drift() const {
  double d = 0.0;
  for (double H : hamiltonian) d = std::max(d, std::abs(H - hamiltonian.front()));
  return d;
}

double GeodesicTrajectory::closure_defect() const {
  return (states.back().u - states.front().u).norm();
}

double hamiltonian(const ProjectionField& D, const GeodesicState& s) {
  return 0.5 * s.xi.dot(D.PT(s.u) * s.xi);
}

GeodesicState geodesic_rhs(const ProjectionField& D, const GeodesicState& s) {
  const auto d = D.dPT(s.u);
  GeodesicState r{D.PT(s.u) * s.xi, Vec(D.m())};
  for (int k = 0; k < D.m(); ++k) r.xi(k) = -0.5 * s.xi.dot(d[k] * s.xi);
  return r;
}

namespace {

GeodesicState axpy(const GeodesicState& s, double a, const GeodesicState& k) {
  return {s.u + a * k.u, s.xi + a * k.xi};
}

}  // namespace

GeodesicTrajectory integrate(const ProjectionField& D, const GeodesicState& s0, double span,
                             double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step must be positive");
  GeodesicTrajectory t;
  t.h = h;
  const int steps = static_cast<int>(std::lround(span / h));
  GeodesicState s = s0;
  t.theta.push_back(0.0);
  t.states.push_back(s);
  t.hamiltonian.push_back(hamiltonian(D, s));
  for (int i = 0; i < steps; ++i) {
    try {
      const GeodesicState k1 = geodesic_rhs(D, s);
      const GeodesicState k2 = geodesic_rhs(D, axpy(s, 0.5 * h, k1));
      const GeodesicState k3 = geodesic_rhs(D, axpy(s, 0.5 * h, k2));
      const GeodesicState k4 = geodesic_rhs(D, axpy(s, h, k3));
      s.u += h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
      s.xi += h / 6.0 * (k1.xi + 2.0 * k2.xi + 2.0 * k3.xi + k4.xi);
      t.hamiltonian.push_back(hamiltonian(D, s));
    } catch (const std::domain_error&) {
      t.truncated = true;
      break;
    }
    t.theta.push_back((i + 1) * h);
    t.states.push_back(s);
  }
  return t;
}

double horizontality_defect(const ProjectionField& D, const GeodesicTrajectory& t) {
  double d = 0.0;
  for (const auto& s : t.states) {
    const Vec du = geodesic_rhs(D, s).u;
    d = std::max(d, (D.PN(s.u) * du).norm());
  }
  return d;
}

std::vector<double> integrable_reduction_check(const ProjectionField& D,
                                               const GeodesicTrajectory& traj) {
  std::vector<double> r;
  const double h2 = traj.h * traj.h;
  for (size_t i = 1; i + 1 < traj.states.size(); ++i) {
    const Vec upp =
        (traj.states[i + 1].u - 2.0 * traj.states[i].u + traj.states[i - 1].u) / h2;
    r.push_back((D.PT(traj.states[i].u) * upp).norm());
  }
  return r;
}

PatchMap sample_patch(const std::function<Vec(double, double)>& f, int n, double half_width) {
  PatchMap p{n, half_width, {}};
  p.values.reserve((n + 1) * (n + 1));
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) p.values.push_back(f(p.x(i), p.x(j)));
  return p;
}

namespace {

// Central first differences along x (l = 0) or y (l = 1) at an interior node.
Vec diff1(const PatchMap& p, int i, int j, int l) {
  return l == 0 ? (p.at(i + 1, j) - p.at(i - 1, j)) / (2.0 * p.h())
                : (p.at(i, j + 1) - p.at(i, j - 1)) / (2.0 * p.h());
}

Vec laplacian(const PatchMap& p, int i, int j) {
  return (p.at(i + 1, j) + p.at(i - 1, j) + p.at(i, j + 1) + p.at(i, j - 1) -
          4.0 * p.at(i, j)) /
         (p.h() * p.h());
}

}  // namespace

Rewrite2DReport verify_2d_rewrite(const ProjectionField& D, const PatchMap& u,
                                  double gate_tol) {
  Rewrite2DReport r;
  const int n = u.n;
  const int m = D.m();
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j) {
      const Mat PT = D.PT(u.at(i, j));
      const Mat PN = Mat::Identity(m, m) - PT;
      const Vec lap = laplacian(u, i, j);
      Vec rhs = Vec::Zero(m);
      for (int l = 0; l < 2; ++l) {
        const Vec du = diff1(u, i, j, l);
        r.horizontality_gate = std::max(r.horizontality_gate, (PN * du).norm());
        // d_l (P_T(u)) by differencing the composite field.
        const Mat dP = l == 0 ? (D.PT(u.at(i + 1, j)) - D.PT(u.at(i - 1, j))) / (2.0 * u.h())
                              : (D.PT(u.at(i, j + 1)) - D.PT(u.at(i, j - 1))) / (2.0 * u.h());
        // div(grad u) = +Delta u, so -Delta u = (A^T - A) grad u.
        const Mat A = PN * dP;
        const Mat Omega = A.transpose() - A;
        r.antisymmetry = std::max(r.antisymmetry, (Omega + Omega.transpose()).norm());
        rhs += Omega * du;
      }
      r.harmonic_gate = std::max(r.harmonic_gate, (PT * lap).norm());
      r.residual = std::max(r.residual, (-lap - rhs).norm());
      r.opposite_sign_residual = std::max(r.opposite_sign_residual, (-lap + rhs).norm());
    }
  r.gates_passed = r.horizontality_gate <= gate_tol && r.harmonic_gate <= gate_tol;
  if (!r.gates_passed) {
    std::ostringstream os;
    os << "2-D rewrite gates failed: horizontality " << r.horizontality_gate
       << ", harmonicity " << r.harmonic_gate << " (tolerance " << gate_tol << ")";
    throw std::runtime_error(os.str());
  }
  return r;
}

Variational2DReport variational_2d_residual(const ProjectionField& D, const PatchMap& u,
                                            const PatchMap& xi1, const PatchMap& xi2) {
  Variational2DReport r;
  const int n = u.n;
  const int m = D.m();
  const PatchMap* xi[2] = {&xi1, &xi2};
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j) {
      const Vec z = u.at(i, j);
      const Mat PT = D.PT(z);
      const auto dP = D.dPT(z);
      Vec div = diff1(xi1, i, j, 0) + diff1(xi2, i, j, 1);
      Vec rhs = Vec::Zero(m);
      Vec schro = -laplacian(u, i, j);
      for (int l = 0; l < 2; ++l) {
        const Vec& x = xi[l]->at(i, j);
        const Vec du = diff1(u, i, j, l);
        r.first_equation = std::max(r.first_equation, (du - PT * x).norm());
        for (int k = 0; k < m; ++k) rhs(k) -= 0.5 * x.dot(dP[k] * x);
        // Omega^{ik}_l = sum_{j,s} xi_j (P^{is} d_s P^{kj} - P^{ks} d_s P^{ij}).
        Mat W = Mat::Zero(m, m);  // W(k, s) = sum_j d_s P^{kj} xi_j
        for (int s = 0; s < m; ++s) W.col(s) = dP[s] * x;
        const Mat Omega = PT * W.transpose() - W * PT;
        r.antisymmetry = std::max(r.antisymmetry, (Omega + Omega.transpose()).norm());
        schro -= Omega * du;
      }
      r.second_equation = std::max(r.second_equation, (div - rhs).norm());
      r.schrodinger = std::max(r.schrodinger, schro.norm());
    }
  return r;
}

}  // namespace hh
