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

#include "commutators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hh {

namespace {

Field K(const Field& f) { return riesz(quarter(f)); }

double proxy(const Field& f, ProxyKind kind) {
  return lorentz_and_hardy_proxy(f.grid(fft_size(std::max(8 * f.N() + 1, 512))), kind);
}

}  // namespace

Field op_T(const Field& Q, const Field& v) {
  return quarter(mul(Q, v)) - mul(Q, quarter(v)) + mul(quarter(Q), v);
}

Field op_S(const Field& Q, const Field& v) {
  return quarter(mul(Q, v)) - riesz(mul(Q, K(v))) + riesz(mul(quarter(Q), riesz(v)));
}

Field op_F(const Field& Q, const Field& v) { return mul(riesz(Q), riesz(v)) - mul(Q, v); }

Field op_Lambda(const Field& Q, const Field& v) { return mul(Q, v) + riesz(mul(Q, riesz(v))); }

Field op_Tstar(const Field& Q, const Field& u) {
  return quarter(mul(Q, quarter(u))) - lap_pow(mul(Q, u), 0.5) + quarter(mul(quarter(Q), u));
}

Field op_Sstar(const Field& Q, const Field& u) {
  return quarter(mul(Q, quarter(u))) - ddtheta(mul(Q, riesz(u))) +
         K(mul(quarter(Q), riesz(u)));
}

Field op_Tbar(const Field& P, const Field& Q) {
  return quarter(mul(P, K(Q))) + quarter(mul(K(P), Q)) - ddtheta(mul(P, Q));
}

Field op_Stilde(const Field& Q, const Field& v) {
  return K(mul(Q, v)) + mul(Q, K(v)) + mul(K(Q), v);
}

Field apply_named(const std::string& op, const Field& a, const Field& b) {
  if (op == "T") return op_T(a, b);
  if (op == "S") return op_S(a, b);
  if (op == "F") return op_F(a, b);
  if (op == "Lambda") return op_Lambda(a, b);
  if (op == "Tstar") return op_Tstar(a, b);
  if (op == "Sstar") return op_Sstar(a, b);
  if (op == "Tbar") return op_Tbar(a, b);
  throw std::invalid_argument("unknown operator '" + op +
                              "' (T, S, F, Lambda, Tstar, Sstar, Tbar)");
}

CommutatorReport describe(const std::string& op, const Field& a, const Field& b,
                          const Field& out) {
  CommutatorReport r;
  r.op = op;
  r.norm_a = sobolev_norm(a, 0.5).homogeneous;
  r.norm_b = l2_norm(b);
  r.out_h_minus_half = h_minus_half_norm(out);
  r.out_h1_proxy = proxy(out, ProxyKind::H1proxy);
  r.out_l21_proxy = proxy(out, ProxyKind::L21);
  return r;
}

DecompositionF decompose_F(const Field& P, const Field& f, const Field& v) {
  DecompositionF d;
  d.lhs = mul(P, op_F(f, v));
  const Field F1 = op_F(mul(P, riesz(f)), riesz(v));
  d.hardy_part = -F1;
  d.lorentz = op_Lambda(P, f);
  d.product = mul(d.lorentz, v);
  d.residual = rel_residual(d.lhs, d.hardy_part - d.product);
  d.literal_residual = rel_residual(d.lhs, F1 - d.product);
  d.report = describe("F", f, v, d.lhs);
  d.report.residual = d.residual;
  return d;
}

Field A_T(const Field& P, const Field& Q) {
  return mul(P, quarter(Q)) + mul(quarter(P), Q) - quarter(mul(P, Q));
}

Field J_T(const Field& P, const Field& Q, const Field& v) {
  return op_T(mul(P, Q), v) - op_T(P, mul(Q, v));
}

DecompositionT decompose_T(const Field& P, const Field& Q, const Field& v) {
  DecompositionT d;
  d.lhs = mul(P, op_T(Q, v));
  d.A_T = A_T(P, Q);
  d.J_T = J_T(P, Q, v);
  d.residual = rel_residual(d.lhs, d.J_T + mul(d.A_T, v));
  const Field ts = op_Tstar(P, Q);
  const Field a0 = d.A_T.without_mean();
  d.reading_minus_quarter = rel_residual(a0, inv_frac_zero_mean(ts, 0.5));
  d.reading_plus_quarter = rel_residual(a0, quarter(ts));
  d.report = describe("T", Q, v, d.lhs);
  d.report.residual = d.residual;
  return d;
}

Field A_S(const Field& P, const Field& Q) {
  const Field KQ = K(Q);
  const Field braces_mean = (mul(P, KQ) + mul(K(P), Q)).mean();
  return inv_frac_zero_mean(op_Tbar(P, Q), 0.5) + braces_mean - op_Lambda(P, KQ);
}

Field J_S(const Field& P, const Field& Q, const Field& v) {
  const Field PDQ = mul(P, quarter(Q));
  return op_Stilde(mul(P, Q), v) - op_Stilde(P, mul(Q, v)) + op_F(riesz(PDQ), v) +
         2.0 * mul(P, K(mul(Q, v))) - mul(PDQ.mean(), riesz(v));
}

DecompositionS decompose_S(const Field& P, const Field& Q, const Field& v) {
  DecompositionS d;
  const Field RS = riesz(op_S(Q, v));
  d.lhs = mul(P, RS);
  d.A_S = A_S(P, Q);
  d.J_S = J_S(P, Q, v);
  d.residual = rel_residual(d.lhs, mul(d.A_S, v) + d.J_S);
  d.decS_residual = rel_residual(RS, op_Stilde(Q, v) + op_F(K(Q), v));
  const Field A_lit = inv_frac_zero_mean(op_Tbar(P, Q), 0.5) + op_Lambda(P, K(Q));
  const Field J_lit = op_Stilde(mul(P, Q), v) - op_Stilde(P, mul(Q, v)) +
                      op_F(riesz(mul(P, quarter(Q))), v);
  d.literal_residual = rel_residual(d.lhs, mul(A_lit, v) + J_lit);
  d.report = describe("S", Q, v, d.lhs);
  d.report.residual = d.residual;
  return d;
}

ProbeStats norm_ratio_probe(const std::string& op, int trials, int N, std::uint64_t seed,
                            bool constant_Q) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  ProbeStats s;
  s.op = op;
  s.trials = trials;
  const bool bilinear_h12 = op == "Tstar" || op == "Sstar" || op == "Tbar";
  auto ratio_of = [&](const Field& a, const Field& b) {
    const Field out = apply_named(op, a, b);
    double num, den;
    if (op == "Lambda") {
      num = proxy(out, ProxyKind::L21);
      den = sobolev_norm(a, 0.5).inhomogeneous * l2_norm(b);
    } else if (op == "F") {
      num = proxy(out, ProxyKind::H1proxy);
      den = l2_norm(a) * l2_norm(b);
    } else {
      num = proxy(out, ProxyKind::H1proxy);
      den = sobolev_norm(a, 0.5).homogeneous *
            (bilinear_h12 ? sobolev_norm(b, 0.5).homogeneous : l2_norm(b));
    }
    // A vanishing right-hand side leaves the output itself as the excess.
    return den > 0.0 ? num / den : num;
  };
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(split_seed(seed, t));
    Field a = random_field(1, 1, N, rng, 1.0, true);
    Field b = random_field(1, 1, N, rng, 1.0, true);
    if (constant_Q)
      a = Field::constant(Eigen::MatrixXd::Constant(1, 1, 0.7), N);
    else
      a *= 1.0 / (op == "F" ? l2_norm(a) : sobolev_norm(a, 0.5).homogeneous);
    b *= 1.0 / (bilinear_h12 ? sobolev_norm(b, 0.5).homogeneous : l2_norm(b));
    const double r = ratio_of(a, b);
    const double r10 = ratio_of(10.0 * a, b);
    s.ratios.push_back(r);
    s.max_ratio = std::max(s.max_ratio, r);
    s.mean_ratio += r / trials;
    if (!constant_Q)
      s.scale_invariance = std::max(s.scale_invariance, std::abs(r10 - r) / std::max(r, 1e-300));
  }
  return s;
}

}  // namespace hh
