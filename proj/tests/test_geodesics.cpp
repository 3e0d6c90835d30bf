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

#include <gtest/gtest.h>

#include "geodesics.hpp"

using namespace hh;

namespace {

constexpr double kTwoPi = 6.283185307179586;

// Inverse stereographic projection, a conformal harmonic map into S^2.
Vec stereo(double x, double y) {
  const double r2 = x * x + y * y;
  return Eigen::Vector3d(2 * x, 2 * y, r2 - 1) / (1 + r2);
}

}  // namespace

TEST(Geodesics, RhsExamples) {
  auto I = make_constant(Mat::Identity(3, 3));
  GeodesicState s{Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(0.5, -1, 2)};
  auto r = geodesic_rhs(*I, s);
  EXPECT_LT((r.u - s.xi).norm(), 1e-15);
  EXPECT_EQ(r.xi.norm(), 0.0);

  // Sphere at the north pole with xi = e1: P_T xi = e1 and, since z.xi = 0,
  // <xi, d_k P_T xi> = -2 xi_k (z.xi) + 2 z_k (z.xi)^2 = 0.
  auto S = make_sphere_tangent(3);
  auto q = geodesic_rhs(*S, {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 0, 0)});
  EXPECT_LT((q.u - Eigen::Vector3d(1, 0, 0)).norm(), 1e-15);
  EXPECT_LT(q.xi.norm(), 1e-15);
  // With a radial component lambda: dxi = lambda * (P_T xi).
  auto q2 = geodesic_rhs(*S, {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 0, 0.5)});
  EXPECT_LT((q2.xi - Eigen::Vector3d(0.5, 0, 0)).norm(), 1e-14);

  auto z = geodesic_rhs(*S, {Eigen::Vector3d(0.3, 0.1, 1), Eigen::Vector3d::Zero()});
  EXPECT_EQ(z.u.norm() + z.xi.norm(), 0.0);
}

TEST(Geodesics, StraightLine) {
  auto I = make_constant(Mat::Identity(2, 2));
  auto t = integrate(*I, {Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 0)}, kTwoPi, kTwoPi / 64);
  EXPECT_LT((t.states.back().u - Eigen::Vector2d(kTwoPi, 0)).norm(), 1e-12);
}

TEST(Geodesics, GreatCircle) {
  auto S = make_sphere_tangent(3);
  const Vec u0 = Eigen::Vector3d(1, 2, 2) / 3.0;
  const Vec x0 = Eigen::Vector3d(2, -2, 1) / 3.0;  // unit, orthogonal to u0
  const double h = kTwoPi / 2048;
  auto t = integrate(*S, {u0, x0}, kTwoPi, h);
  double dev = 0.0;
  for (size_t i = 0; i < t.states.size(); ++i) {
    const double th = t.theta[i];
    dev = std::max(dev, (t.states[i].u - (std::cos(th) * u0 + std::sin(th) * x0)).norm());
  }
  EXPECT_LT(dev, 1e-6);
  EXPECT_LT(horizontality_defect(*S, t), 1e-10);
  const auto red = integrable_reduction_check(*S, t);
  EXPECT_LT(*std::max_element(red.begin(), red.end()), 1e-6);
  EXPECT_LT(t.closure_defect(), 1e-6);
}

TEST(Geodesics, HeisenbergHelix) {
  // u = (R cos w s, R sin w s, R^2 w s / 2) is a normal geodesic of the
  // Euclidean-induced metric with xi = (-(Rw/2) sin, (Rw/2) cos, w (1 + R^2/2)):
  // rotation equivariance reduces the second equation to lambda = w for the
  // normal momentum lambda = <a, xi> / |a|^2.
  auto H = make_heisenberg();
  for (double R : {1.0, 0.5}) {
    const double w = 1.3;
    const GeodesicState s0{Eigen::Vector3d(R, 0, 0),
                           Eigen::Vector3d(0, R * w / 2, w * (1 + R * R / 2))};
    auto t = integrate(*H, s0, kTwoPi, kTwoPi / 2048);
    double dev = 0.0;
    for (size_t i = 0; i < t.states.size(); ++i) {
      const double s = t.theta[i];
      const Vec exact =
          Eigen::Vector3d(R * std::cos(w * s), R * std::sin(w * s), 0.5 * R * R * w * s);
      dev = std::max(dev, (t.states[i].u - exact).norm());
    }
    EXPECT_LT(dev, 1e-5);
    EXPECT_GT(std::abs(s0.xi(2)), 0.5);
  }
}

TEST(Geodesics, HamiltonianDriftIsFourthOrder) {
  auto H = make_heisenberg();
  const GeodesicState s0{Eigen::Vector3d(0.4, -0.2, 0.1), Eigen::Vector3d(0.9, 0.5, 0.7)};
  const double span = 10.0;
  auto a = integrate(*H, s0, span, span / 80);
  auto b = integrate(*H, s0, span, span / 160);
  const double ratio = a.max_drift() / b.max_drift();
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(Geodesics, TimeReversal) {
  auto H = make_hopf(2);
  const GeodesicState s0{Eigen::Vector4d(1, 0.2, -0.3, 0.5), Eigen::Vector4d(0.3, 1, 0.8, -0.4)};
  auto f = integrate(*H, s0, 2.0, 0.01);
  auto b = integrate(*H, {f.states.back().u, -f.states.back().xi}, 2.0, 0.01);
  EXPECT_LT((b.states.back().u - s0.u).norm(), 1e-8);
}

TEST(Geodesics, SingularLocusTruncates) {
  auto S = make_sphere_tangent(3);
  // Straight radial motion hits the origin.
  auto t = integrate(*S, {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)}, 1.0, 0.1);
  EXPECT_FALSE(t.truncated);
  EXPECT_THROW(geodesic_rhs(*S, {Eigen::Vector3d::Zero(), Eigen::Vector3d(0, 1, 0)}),
               std::domain_error);
}

TEST(Geodesics, RewriteConvergesAtOrderTwo) {
  auto S = make_sphere_tangent(3);
  auto coarse = verify_2d_rewrite(*S, sample_patch(stereo, 32, 0.5));
  auto fine = verify_2d_rewrite(*S, sample_patch(stereo, 64, 0.5));
  EXPECT_GT(coarse.residual / fine.residual, 3.5);
  EXPECT_EQ(coarse.antisymmetry, 0.0);
  // The opposite sign leaves 2 |grad u|^2 u = 16 at the patch centre.
  EXPECT_GT(fine.opposite_sign_residual, 10.0);

  auto c = verify_2d_rewrite(*S, sample_patch([](double, double) -> Vec {
    return Eigen::Vector3d(0, 0, 1);
  }, 16, 0.5));
  EXPECT_EQ(c.residual, 0.0);
}

TEST(Geodesics, RewriteGateRefusesNonHorizontalMaps) {
  auto H = make_hopf(2);
  auto bad = sample_patch([](double x, double y) -> Vec {
    return Eigen::Vector4d(1 + x, y, 0, 0);
  }, 16, 0.5);
  EXPECT_THROW(verify_2d_rewrite(*H, bad), std::runtime_error);
}

TEST(Geodesics, Variational2DOracle) {
  // xi^l = d_l u + d_l(phi) u with Delta phi = |grad u|^2 = 8 / (1 + r^2)^2,
  // phi = 2 log(1 + r^2).
  auto S = make_sphere_tangent(3);
  auto xi = [](int l) {
    return [l](double x, double y) -> Vec {
      const double r2 = x * x + y * y, d = 1 + r2;
      Vec du = l == 0 ? Eigen::Vector3d(2 * (1 - x * x + y * y), -4 * x * y, 4 * x) / (d * d)
                      : Eigen::Vector3d(-4 * x * y, 2 * (1 + x * x - y * y), 4 * y) / (d * d);
      const double dphi = 4.0 * (l == 0 ? x : y) / d;
      return du + dphi * stereo(x, y);
    };
  };
  Variational2DReport prev;
  for (int n : {32, 64}) {
    auto r = variational_2d_residual(*S, sample_patch(stereo, n, 0.5),
                                     sample_patch(xi(0), n, 0.5), sample_patch(xi(1), n, 0.5));
    EXPECT_LT(r.antisymmetry, 1e-14);
    EXPECT_LT(r.schrodinger, 1e-2);
    if (n == 64) {
      EXPECT_GT(prev.first_equation / r.first_equation, 3.5);
      EXPECT_GT(prev.second_equation / r.second_equation, 3.5);
      EXPECT_GT(prev.schrodinger / r.schrodinger, 3.5);
    }
    prev = r;
  }
  auto zero = sample_patch([](double, double) -> Vec { return Vec::Zero(3); }, 8, 0.5);
  auto cst = sample_patch([](double, double) -> Vec { return Eigen::Vector3d(0, 0, 1); }, 8, 0.5);
  auto r0 = variational_2d_residual(*S, cst, zero, zero);
  EXPECT_EQ(r0.first_equation + r0.second_equation, 0.0);
}

TEST(Geodesics, Variational2DGradientOnlyFailsSecondEquation) {
  // xi = grad u misses the normal momentum: div xi = Delta u = -|grad u|^2 u.
  auto S = make_sphere_tangent(3);
  auto g = [](int l) {
    return [l](double x, double y) -> Vec {
      const double d = 1 + x * x + y * y;
      return l == 0 ? Vec(Eigen::Vector3d(2 * (1 - x * x + y * y), -4 * x * y, 4 * x) / (d * d))
                    : Vec(Eigen::Vector3d(-4 * x * y, 2 * (1 + x * x - y * y), 4 * y) / (d * d));
    };
  };
  auto r = variational_2d_residual(*S, sample_patch(stereo, 32, 0.5), sample_patch(g(0), 32, 0.5),
                                   sample_patch(g(1), 32, 0.5));
  EXPECT_GT(r.second_equation, 1.0);
}
