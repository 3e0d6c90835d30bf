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

#include "spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace hh {

namespace {

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::Unscaled);
    return f;
  }();
  return fft;
}

void check_same_shape(const Field& a, const Field& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("field shapes differ");
}

}  // namespace

int fft_size(int min_nodes) {
  for (int n = std::max(min_nodes, 2);; ++n) {
    int r = n;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return n;
  }
}

Eigen::MatrixXd GridField::matrix(int t) const {
  Eigen::MatrixXd a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = values(i * cols + j, t);
  return a;
}

void GridField::set_matrix(int t, const Eigen::MatrixXd& a) {
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) values(i * cols + j, t) = a(i, j);
}

Field::Field(int rows, int cols, int N)
    : rows_(rows), cols_(cols), N_(N),
      c_(Eigen::MatrixXcd::Zero(rows * cols, 2 * N + 1)) {
  if (rows <= 0 || cols <= 0 || N < 0)
    throw std::invalid_argument("invalid field dimensions");
}

Field Field::constant(const Eigen::MatrixXd& a, int N) {
  Field f(static_cast<int>(a.rows()), static_cast<int>(a.cols()), N);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) f.c_(i * a.cols() + j, N) = a(i, j);
  return f;
}

Field Field::identity(int m, int N) {
  return constant(Eigen::MatrixXd::Identity(m, m), N);
}

void Field::set_mode(int k, int n, cd v) {
  if (std::abs(n) > N_ || k < 0 || k >= m()) throw std::out_of_range("mode outside field");
  if (n == 0) {
    c_(k, N_) = cd(v.real(), 0.0);
    return;
  }
  c_(k, n + N_) = v;
  c_(k, -n + N_) = std::conj(v);
}

Field Field::from_grid(const GridField& g, int N) {
  const int M = g.M();
  if (M < 2 * N + 1) throw std::invalid_argument("grid too coarse for bandwidth");
  Field f(g.rows, g.cols, N);
  auto& fft = fft_engine();
  std::vector<cd> in(M), out(M);
  for (int k = 0; k < g.m(); ++k) {
    for (int t = 0; t < M; ++t) in[t] = cd(g.values(k, t), 0.0);
    fft.fwd(out, in);
    f.c_(k, N) = cd(out[0].real() / M, 0.0);
    for (int n = 1; n <= N; ++n) {
      const cd v = out[n] / static_cast<double>(M);
      f.c_(k, N + n) = v;
      f.c_(k, N - n) = std::conj(v);
    }
  }
  return f;
}

GridField Field::grid(int M) const {
  if (M < 2 * N_ + 1) throw std::invalid_argument("grid too coarse for bandwidth");
  GridField g{rows_, cols_, Eigen::MatrixXd(m(), M)};
  auto& fft = fft_engine();
  std::vector<cd> in(M), out(M);
  for (int k = 0; k < m(); ++k) {
    std::fill(in.begin(), in.end(), cd(0.0, 0.0));
    for (int n = -N_; n <= N_; ++n) in[((n % M) + M) % M] += c_(k, n + N_);
    fft.inv(out, in);
    for (int t = 0; t < M; ++t) g.values(k, t) = out[t].real();
  }
  return g;
}

GridField Field::grid() const { return grid(fft_size(2 * N_ + 1)); }

Eigen::VectorXd Field::eval(double theta) const {
  Eigen::VectorXd v(m());
  for (int k = 0; k < m(); ++k) {
    double s = c_(k, N_).real();
    for (int n = 1; n <= N_; ++n)
      s += 2.0 * (c_(k, N_ + n) * std::polar(1.0, n * theta)).real();
    v(k) = s;
  }
  return v;
}

Field Field::component(int k) const {
  Field f(1, 1, N_);
  f.c_.row(0) = c_.row(k);
  return f;
}

Field Field::mean() const {
  Field f(rows_, cols_, N_);
  f.c_.col(N_) = c_.col(N_);
  return f;
}

Field Field::without_mean() const {
  Field f = *this;
  f.c_.col(N_).setZero();
  return f;
}

Field Field::transpose() const {
  Field f(cols_, rows_, N_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) f.c_.row(j * rows_ + i) = c_.row(i * cols_ + j);
  return f;
}

Field Field::with_bandwidth(int N) const {
  Field f(rows_, cols_, N);
  const int K = std::min(N, N_);
  f.c_.middleCols(N - K, 2 * K + 1) = c_.middleCols(N_ - K, 2 * K + 1);
  return f;
}

Field Field::reshaped(int rows, int cols) const {
  if (rows * cols != m()) throw std::invalid_argument("reshape changes size");
  Field f = *this;
  f.rows_ = rows;
  f.cols_ = cols;
  return f;
}

Field& Field::operator+=(const Field& o) {
  check_same_shape(*this, o);
  if (o.N_ > N_) *this = with_bandwidth(o.N_);
  c_.middleCols(N_ - o.N_, 2 * o.N_ + 1) += o.c_;
  return *this;
}

Field& Field::operator-=(const Field& o) {
  check_same_shape(*this, o);
  if (o.N_ > N_) *this = with_bandwidth(o.N_);
  c_.middleCols(N_ - o.N_, 2 * o.N_ + 1) -= o.c_;
  return *this;
}

Field& Field::operator*=(double s) {
  c_ *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator-(Field a) { return a *= -1.0; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(Field a, double s) { return a *= s; }

MultiplierSymbol MultiplierSymbol::frac_laplacian(double s) {
  const bool undefined_zero = s < 0.0;
  return {"frac_laplacian", [s, undefined_zero](int n) -> cd {
            if (n == 0)
              return undefined_zero ? cd(std::numeric_limits<double>::quiet_NaN(), 0.0)
                                    : cd(s == 0.0 ? 1.0 : 0.0, 0.0);
            return cd(std::pow(std::abs(static_cast<double>(n)), 2.0 * s), 0.0);
          },
          s > 0.0};
}

MultiplierSymbol MultiplierSymbol::riesz() {
  return {"riesz", [](int n) { return cd(0.0, n > 0 ? 1.0 : (n < 0 ? -1.0 : 0.0)); },
          true};
}

MultiplierSymbol MultiplierSymbol::inv_frac_zero(double a) {
  return {"inv_frac_zero", [a](int n) -> cd {
            if (n == 0) return cd(0.0, 0.0);
            return cd(std::pow(std::abs(static_cast<double>(n)), -a), 0.0);
          },
          true};
}

MultiplierSymbol MultiplierSymbol::derivative() {
  return {"derivative", [](int n) { return cd(0.0, static_cast<double>(n)); }, true};
}

Field apply_multiplier(const Field& f, const MultiplierSymbol& s) {
  Field out(f.rows(), f.cols(), f.N());
  auto& c = out.coeffs();
  const auto& in = f.coeffs();
  for (int n = -f.N(); n <= f.N(); ++n) {
    const cd g = s(n);
    if (n == 0 && std::isnan(g.real())) {
      if (in.col(f.N()).norm() > 0.0)
        throw std::domain_error(s.name + ": zero mode undefined for field with nonzero mean");
      continue;
    }
    c.col(n + f.N()) = g * in.col(n + f.N());
  }
  return out;
}

Field lap_pow(const Field& f, double s) {
  return apply_multiplier(f, MultiplierSymbol::frac_laplacian(s));
}
Field quarter(const Field& f) { return lap_pow(f, 0.25); }
Field riesz(const Field& f) { return apply_multiplier(f, MultiplierSymbol::riesz()); }
Field ddtheta(const Field& f) {
  return apply_multiplier(f, MultiplierSymbol::derivative());
}
Field inv_frac_zero_mean(const Field& f, double alpha) {
  return apply_multiplier(f, MultiplierSymbol::inv_frac_zero(alpha));
}

Field mul(const Field& a, const Field& b, int out_N, double* truncated) {
  bool scalar_a = a.m() == 1, scalar_b = b.m() == 1;
  if (!scalar_a && !scalar_b && a.cols() != b.rows())
    throw std::invalid_argument("incompatible dimensions in pointwise product");
  const int N = a.N() + b.N();
  const int M = fft_size(2 * N + 1);
  const GridField ga = a.grid(M), gb = b.grid(M);
  int rows, cols;
  if (scalar_a) {
    rows = b.rows();
    cols = b.cols();
  } else if (scalar_b) {
    rows = a.rows();
    cols = a.cols();
  } else {
    rows = a.rows();
    cols = b.cols();
  }
  GridField g{rows, cols, Eigen::MatrixXd(rows * cols, M)};
  for (int t = 0; t < M; ++t) {
    if (scalar_a)
      g.values.col(t) = ga.values(0, t) * gb.values.col(t);
    else if (scalar_b)
      g.values.col(t) = gb.values(0, t) * ga.values.col(t);
    else
      g.set_matrix(t, ga.matrix(t) * gb.matrix(t));
  }
  Field full = Field::from_grid(g, N);
  if (out_N < 0 || out_N >= N) {
    if (truncated) *truncated = 0.0;
    return full;
  }
  Field cut = full.with_bandwidth(out_N);
  if (truncated) *truncated = std::sqrt(std::max(0.0, std::pow(l2_norm(full), 2) -
                                                          std::pow(l2_norm(cut), 2)));
  return cut;
}

Field mul(const Field& a, const Field& b, const Field& c) { return mul(mul(a, b), c); }

Field map_pointwise(const Field& f, int out_N, int M,
                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn,
                    int out_rows, int out_cols) {
  const GridField g = f.grid(M);
  GridField o{out_rows, out_cols, Eigen::MatrixXd(out_rows * out_cols, M)};
  for (int t = 0; t < M; ++t) o.values.col(t) = fn(g.values.col(t));
  return Field::from_grid(o, out_N);
}

double inner(const Field& f, const Field& g) {
  check_same_shape(f, g);
  const int K = std::min(f.N(), g.N());
  double s = 0.0;
  for (int n = -K; n <= K; ++n)
    s += (f.coeffs().col(n + f.N()).dot(g.coeffs().col(n + g.N()))).real();
  return kTwoPi * s;
}

double l2_norm(const Field& f) { return std::sqrt(kTwoPi) * f.coeffs().norm(); }

double linf_norm(const Field& f) {
  return grid_linf_norm(f.grid(fft_size(std::max(4 * f.N() + 1, 16))));
}

double grid_l2_norm(const GridField& g) {
  return std::sqrt(kTwoPi / g.M()) * g.values.norm();
}

double grid_linf_norm(const GridField& g) {
  double s = 0.0;
  for (int t = 0; t < g.M(); ++t) s = std::max(s, g.values.col(t).norm());
  return s;
}

SobolevNorms sobolev_norm(const Field& f, double s) {
  double inh = 0.0, hom = 0.0;
  for (int n = -f.N(); n <= f.N(); ++n) {
    const double e = f.coeffs().col(n + f.N()).squaredNorm();
    const double a = std::abs(static_cast<double>(n));
    inh += std::pow(1.0 + a, 2.0 * s) * e;
    if (n != 0) hom += std::pow(a, 2.0 * s) * e;
  }
  return {std::sqrt(kTwoPi * inh), std::sqrt(kTwoPi * hom)};
}

double h_minus_half_norm(const Field& f) {
  double s = 0.0;
  for (int n = -f.N(); n <= f.N(); ++n) {
    const double e = f.coeffs().col(n + f.N()).squaredNorm();
    s += n == 0 ? e : e / std::abs(static_cast<double>(n));
  }
  return std::sqrt(kTwoPi * s);
}

double lorentz_and_hardy_proxy(const GridField& f, ProxyKind kind) {
  const int M = f.M();
  const double dt = kTwoPi / M;
  if (kind == ProxyKind::H1proxy) {
    const Field c = Field::from_grid(f, (M - 1) / 2);
    const GridField r = riesz(c).grid(M);
    double s = 0.0;
    for (int t = 0; t < M; ++t) s += f.values.col(t).norm() + r.values.col(t).norm();
    return s * dt;
  }
  std::vector<double> a(M);
  for (int t = 0; t < M; ++t) a[t] = f.values.col(t).norm();
  std::sort(a.begin(), a.end(), std::greater<>());
  double s = 0.0;
  for (int k = 0; k < M; ++k) {
    const double tk = (k + 1) * dt;
    if (kind == ProxyKind::L21)
      s += a[k] * dt / std::sqrt(tk);
    else
      s = std::max(s, std::sqrt(tk) * a[k]);
  }
  return s;
}

double rel_residual(const Field& a, const Field& b) {
  const double d = l2_norm(a - b);
  const double s = std::max({l2_norm(a), l2_norm(b), std::numeric_limits<double>::epsilon()});
  return d / s;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Field random_field(int rows, int cols, int N, std::mt19937_64& rng, double decay,
                   bool zero_mean) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Field f(rows, cols, N);
  for (int k = 0; k < f.m(); ++k)
    for (int n = 0; n <= N; ++n) {
      const double w = std::pow(1.0 + n, -decay);
      const double re = nd(rng) * w, im = nd(rng) * w;
      if (n == 0 && zero_mean) continue;
      f.set_mode(k, n, n == 0 ? cd(re, 0.0) : cd(re, im) * std::sqrt(0.5));
    }
  return f;
}

}  // namespace hh
