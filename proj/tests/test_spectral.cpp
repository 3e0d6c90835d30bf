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

#include "spectral.hpp"

using namespace hh;

namespace {

Field mode(int n, cd v = 1.0, int N = 8) {
  Field f = Field::vector(1, N);
  f.set_mode(0, n, v);
  return f;
}

Field cos_field(int N = 4) { return mode(1, 0.5, N); }

}  // namespace

TEST(Spectral, SynthesisAnalysisRoundTrip) {
  std::mt19937_64 rng(11);
  Field f = random_field(3, 1, 20, rng);
  for (int M : {41, 64, 90}) {
    Field g = Field::from_grid(f.grid(M), 20);
    EXPECT_LT((g.coeffs() - f.coeffs()).norm(), 1e-12 * f.coeffs().norm());
  }
}

TEST(Spectral, GridMatchesPointEvaluation) {
  std::mt19937_64 rng(3);
  Field f = random_field(2, 1, 7, rng);
  GridField g = f.grid(30);
  for (int t = 0; t < 30; ++t)
    EXPECT_LT((g.values.col(t) - f.eval(kTwoPi * t / 30)).norm(), 1e-12);
}

TEST(Spectral, MultiplierExamples) {
  // |1|^{1/2} = 1 leaves the first mode alone.
  Field e1 = mode(1);
  Field h = apply_multiplier(e1, MultiplierSymbol::frac_laplacian(0.25));
  EXPECT_LT((h.coeffs() - e1.coeffs()).norm(), 1e-15);

  // R cos = -sin.
  Field r = riesz(cos_field());
  for (double th : {0.1, 0.7, 2.3}) EXPECT_NEAR(r.eval(th)(0), -std::sin(th), 1e-14);

  Field one = Field::constant(Eigen::MatrixXd::Ones(1, 1), 3);
  EXPECT_EQ(riesz(one).coeffs().norm(), 0.0);
}

TEST(Spectral, UndefinedZeroModeIsRejected) {
  Field one = Field::constant(Eigen::MatrixXd::Ones(1, 1), 3);
  EXPECT_THROW(lap_pow(one, -0.25), std::domain_error);
  EXPECT_NO_THROW(lap_pow(cos_field(), -0.25));
}

TEST(Spectral, SymbolsAtHighModes) {
  for (int n = -128; n <= 128; ++n) {
    Field f = mode(n == 0 ? 0 : std::abs(n), 1.0, 128);
    Field q = quarter(f), r = riesz(f);
    const int a = std::abs(n);
    EXPECT_NEAR(std::abs(q.coef(0, a) - std::sqrt(double(a)) * f.coef(0, a)), 0.0, 1e-12);
    const cd sg(0.0, a > 0 ? 1.0 : 0.0);
    EXPECT_NEAR(std::abs(r.coef(0, a) - sg * f.coef(0, a)), 0.0, 1e-12);
  }
}

TEST(Spectral, InverseFractionalZeroMean) {
  Field e1 = mode(1);
  EXPECT_LT((inv_frac_zero_mean(e1, 0.5).coeffs() - e1.coeffs()).norm(), 1e-15);
  Field one = Field::constant(Eigen::MatrixXd::Ones(1, 1), 3);
  EXPECT_EQ(inv_frac_zero_mean(one, 0.3).coeffs().norm(), 0.0);

  // Semigroup: apply |n|^{-1/4} twice by hand and compare.
  std::mt19937_64 rng(5);
  Field f = random_field(2, 1, 30, rng);
  Field twice = inv_frac_zero_mean(inv_frac_zero_mean(f, 0.25), 0.25);
  Field once = inv_frac_zero_mean(f, 0.5);
  EXPECT_LT((twice.coeffs() - once.coeffs()).norm(), 1e-12);
  for (int n = 1; n <= 30; ++n) {
    const cd oracle = f.coef(1, n) * std::pow(double(n), -0.25) * std::pow(double(n), -0.25);
    EXPECT_NEAR(std::abs(twice.coef(1, n) - oracle), 0.0, 1e-14);
  }
  // (-Delta)^{alpha/2} of the output recovers f minus its mean.
  Field back = lap_pow(inv_frac_zero_mean(f, 0.7), 0.35);
  EXPECT_LT((back.coeffs() - f.without_mean().coeffs()).norm(), 1e-12);
}

TEST(Spectral, SelfAdjointness) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    Field f = random_field(1, 1, 25, rng), g = random_field(1, 1, 25, rng);
    for (double a : {0.25, 0.5, 1.0}) {
      const double lhs = inner(inv_frac_zero_mean(f, a), g);
      const double rhs = inner(f, inv_frac_zero_mean(g, a));
      EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST(Spectral, RieszSquaredIsMinusIdentityOnZeroMean) {
  std::mt19937_64 rng(9);
  Field f = random_field(3, 1, 16, rng, 1.0, true);
  EXPECT_LT((riesz(riesz(f)) + f).coeffs().norm(), 1e-12);
}

TEST(Spectral, SobolevNorms) {
  Field c = cos_field();
  // Parseval: |cos|_{H^{1/2}}^2 = 2 pi (1/4 + 1/4).
  EXPECT_NEAR(std::pow(sobolev_norm(c, 0.5).homogeneous, 2), kPi, 1e-12);
  Field one = Field::constant(Eigen::MatrixXd::Ones(1, 1), 3);
  EXPECT_EQ(sobolev_norm(one, 0.7).homogeneous, 0.0);
  EXPECT_NEAR(sobolev_norm(one, 0.7).inhomogeneous, std::sqrt(kTwoPi), 1e-14);

  std::mt19937_64 rng(2);
  Field f = random_field(2, 1, 12, rng);
  // Grid quadrature of (-Delta)^{1/4} f against the coefficient sum.
  const double via_grid = grid_l2_norm(quarter(f).grid(64));
  EXPECT_NEAR(via_grid, sobolev_norm(f, 0.5).homogeneous, 1e-12);
  EXPECT_NEAR(grid_l2_norm(f.grid(40)), l2_norm(f), 1e-12);
}

TEST(Spectral, HMinusHalfNorm) {
  Field f = mode(4, 1.0);
  // Two modes of weight 1/4 each.
  EXPECT_NEAR(h_minus_half_norm(f), std::sqrt(kTwoPi * 0.5), 1e-14);
}

TEST(Spectral, LorentzAndHardyProxies) {
  GridField z{1, 1, Eigen::MatrixXd::Zero(1, 64)};
  for (auto k : {ProxyKind::L21, ProxyKind::L2inf, ProxyKind::H1proxy})
    EXPECT_EQ(lorentz_and_hardy_proxy(z, k), 0.0);

  // Step of height h on a fraction lambda: f*(t) = h for t < 2 pi lambda.
  const int M = 4000;
  const double h = 3.0, lambda = 0.2;
  GridField s{1, 1, Eigen::MatrixXd::Zero(1, M)};
  for (int t = 0; t < int(lambda * M); ++t) s.values(0, t) = h;
  const double oracle = h * std::sqrt(kTwoPi * lambda);
  EXPECT_NEAR(lorentz_and_hardy_proxy(s, ProxyKind::L2inf), oracle, 0.02 * oracle);
  // L^{2,1} of the step: integral of t^{-1/2} h over (0, 2 pi lambda).
  const double l21 = 2.0 * h * std::sqrt(kTwoPi * lambda);
  EXPECT_NEAR(lorentz_and_hardy_proxy(s, ProxyKind::L21), l21, 0.05 * l21);

  GridField c = cos_field().grid(8192);
  EXPECT_NEAR(lorentz_and_hardy_proxy(c, ProxyKind::H1proxy), 8.0, 1e-6);
}

TEST(Spectral, ProductExamples) {
  std::mt19937_64 rng(4);
  Field b = random_field(2, 1, 6, rng);
  Field one = Field::constant(Eigen::MatrixXd::Ones(1, 1), 0);
  EXPECT_LT((mul(one, b).coeffs() - b.coeffs()).norm(), 1e-15);

  Field cc = mul(cos_field(1), cos_field(1));
  EXPECT_NEAR(std::abs(cc.coef(0, 0) - 0.5), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(cc.coef(0, 2) - 0.25), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(cc.coef(0, 1)), 0.0, 1e-14);

  const int N = 10;
  Field a = mode(N, 1.0, N);
  Field aa = mul(a, a);
  EXPECT_EQ(aa.N(), 2 * N);
  EXPECT_NEAR(std::abs(aa.coef(0, 2 * N) - 1.0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(aa.coef(0, 0) - 2.0), 0.0, 1e-13);

  double lost = -1.0;
  Field cut = mul(a, a, N, &lost);
  EXPECT_EQ(cut.N(), N);
  EXPECT_NEAR(lost, std::sqrt(kTwoPi * 2.0), 1e-12);
}

TEST(Spectral, MatrixProduct) {
  std::mt19937_64 rng(6);
  Field A = random_field(3, 2, 4, rng), B = random_field(2, 3, 5, rng);
  Field C = mul(A, B);
  for (double th : {0.2, 1.9, 4.4}) {
    Eigen::VectorXd a = A.eval(th), b = B.eval(th), c = C.eval(th);
    Eigen::MatrixXd Am = Eigen::Map<Eigen::Matrix<double, 3, 2, Eigen::RowMajor>>(a.data());
    Eigen::MatrixXd Bm = Eigen::Map<Eigen::Matrix<double, 2, 3, Eigen::RowMajor>>(b.data());
    Eigen::MatrixXd Cm = Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(c.data());
    EXPECT_LT((Am * Bm - Cm).norm(), 1e-12);
  }
  EXPECT_THROW(mul(A, A), std::invalid_argument);
}

TEST(Spectral, Linearity) {
  std::mt19937_64 rng(12);
  Field f = random_field(1, 1, 9, rng), g = random_field(1, 1, 9, rng);
  for (auto s : {MultiplierSymbol::riesz(), MultiplierSymbol::frac_laplacian(0.3),
                 MultiplierSymbol::inv_frac_zero(0.5)}) {
    Field lhs = apply_multiplier(2.0 * f - 3.0 * g, s);
    Field rhs = 2.0 * apply_multiplier(f, s) - 3.0 * apply_multiplier(g, s);
    EXPECT_LT((lhs - rhs).coeffs().norm(), 1e-12);
  }
}
