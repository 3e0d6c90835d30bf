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
#include <random>
#include <string>

#include <Eigen/Dense>

namespace hh {

using cd = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Samples of an m-component field at theta_j = 2 pi j / M.  Row k holds
// component k; matrix-valued data is stored row-major (k = i * cols + j).
struct GridField {
  int rows = 0;
  int cols = 1;
  Eigen::MatrixXd values;

  int m() const { return rows * cols; }
  int M() const { return static_cast<int>(values.cols()); }
  // Entry (i, j) of the matrix at node t.
  double at(int i, int j, int t) const { return values(i * cols + j, t); }
  Eigen::MatrixXd matrix(int t) const;
  void set_matrix(int t, const Eigen::MatrixXd& a);
};

// Real-valued bandlimited field f = sum_{|n|<=N} c_n e^{in theta}.  Coefficient
// storage is (rows*cols) x (2N+1), column n+N holding mode n.
class Field {
 public:
  Field() = default;
  Field(int rows, int cols, int N);

  static Field vector(int m, int N) { return Field(m, 1, N); }
  static Field constant(const Eigen::MatrixXd& a, int N = 0);
  static Field identity(int m, int N = 0);
  // Analysis of grid samples, keeping modes |n| <= N.  Exact when M >= 2N+1
  // and the samples come from a field of bandwidth N.
  static Field from_grid(const GridField& g, int N);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int m() const { return rows_ * cols_; }
  int N() const { return N_; }

  cd coef(int k, int n) const { return c_(k, n + N_); }
  // Sets c_n and c_{-n} = conj(c_n) together.
  void set_mode(int k, int n, cd v);
  const Eigen::MatrixXcd& coeffs() const { return c_; }
  Eigen::MatrixXcd& coeffs() { return c_; }

  GridField grid(int M) const;
  // Grid with the smallest FFT-friendly M >= 2N+1.
  GridField grid() const;
  // Values at an arbitrary angle, component-major.
  Eigen::VectorXd eval(double theta) const;

  Field component(int k) const;
  Field mean() const;
  Field without_mean() const;
  Field transpose() const;
  Field with_bandwidth(int N) const;  // pad or truncate
  Field reshaped(int rows, int cols) const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double s);

 private:
  int rows_ = 0;
  int cols_ = 1;
  int N_ = 0;
  Eigen::MatrixXcd c_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator-(Field a);
Field operator*(double s, Field a);
Field operator*(Field a, double s);

// Fourier multiplier n -> sigma(n).  A NaN at n = 0 marks an undefined zero
// mode; applying such a symbol to a field with nonzero mean throws.
struct MultiplierSymbol {
  std::string name;
  std::function<cd(int)> rule;
  bool zero_mode_annihilated = false;

  cd operator()(int n) const { return rule(n); }
  static MultiplierSymbol frac_laplacian(double s);  // |n|^{2s}
  static MultiplierSymbol riesz();                   // i sgn(n)
  static MultiplierSymbol inv_frac_zero(double a);   // |n|^{-a}, 0 at n = 0
  static MultiplierSymbol derivative();              // i n
};

Field apply_multiplier(const Field& f, const MultiplierSymbol& s);

// Shorthands used throughout the library.
Field lap_pow(const Field& f, double s);      // (-Delta)^s, s >= 0
Field quarter(const Field& f);                // (-Delta)^{1/4}
Field riesz(const Field& f);                  // R
Field ddtheta(const Field& f);                // d/dtheta
Field inv_frac_zero_mean(const Field& f, double alpha);  // (-Delta)_0^{-alpha/2}

// Pointwise matrix product a(theta) b(theta).  The result carries bandwidth
// Na + Nb and is exact; out_N >= 0 truncates and reports the discarded L2
// energy through `truncated`.
Field mul(const Field& a, const Field& b, int out_N = -1,
          double* truncated = nullptr);
Field mul(const Field& a, const Field& b, const Field& c);

// Applies a pointwise nonlinear map on a grid of M >= 2*N_in+1 nodes and
// re-analyzes at bandwidth out_N.
Field map_pointwise(const Field& f, int out_N, int M,
                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn,
                    int out_rows, int out_cols);

// Integral over [0, 2 pi] of sum_k f_k g_k.
double inner(const Field& f, const Field& g);
double l2_norm(const Field& f);
double linf_norm(const Field& f);
double grid_l2_norm(const GridField& g);
double grid_linf_norm(const GridField& g);

struct SobolevNorms {
  double inhomogeneous = 0.0;
  double homogeneous = 0.0;
};
SobolevNorms sobolev_norm(const Field& f, double s);
// (sum_{n != 0} |n|^{-1} |c_n|^2 + |c_0|^2)^{1/2}, scaled like the L2 norm.
double h_minus_half_norm(const Field& f);

enum class ProxyKind { L21, L2inf, H1proxy };
double lorentz_and_hardy_proxy(const GridField& f, ProxyKind kind);

// Relative residual |a - b| / max(|a|, |b|, eps) in L2.
double rel_residual(const Field& a, const Field& b);

int fft_size(int min_nodes);

// Counter-split seeding: independent generator per (seed, stream).
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

// Random real field with coefficients ~ N(0,1) (1+|n|)^{-decay}.
Field random_field(int rows, int cols, int N, std::mt19937_64& rng,
                   double decay = 1.0, bool zero_mean = false);

}  // namespace hh
