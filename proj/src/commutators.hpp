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

#include "spectral.hpp"

namespace hh {

// D = (-Delta)^{1/4}, R = Riesz transform, K = R D.
Field op_T(const Field& Q, const Field& v);
Field op_S(const Field& Q, const Field& v);
Field op_F(const Field& Q, const Field& v);
Field op_Lambda(const Field& Q, const Field& v);
Field op_Tstar(const Field& Q, const Field& u);
Field op_Sstar(const Field& Q, const Field& u);
Field op_Tbar(const Field& P, const Field& Q);
// R D[Qv] + Q R D v + (R D Q) v.
Field op_Stilde(const Field& Q, const Field& v);

struct CommutatorReport {
  std::string op;
  double norm_a = 0.0;  // H^{1/2} seminorm of Q (or P, f)
  double norm_b = 0.0;  // L2 norm of v
  double out_h_minus_half = 0.0;
  double out_h1_proxy = 0.0;
  double out_l21_proxy = 0.0;
  double residual = 0.0;
  double ratio = 0.0;
};

CommutatorReport describe(const std::string& op, const Field& a, const Field& b,
                          const Field& out);

struct DecompositionF {
  Field lhs;          // P F(f, v)
  Field hardy_part;   // -F(P R f, R v)
  Field lorentz;      // Lambda(P, f)
  Field product;      // Lambda(P, f) v
  double residual = 0.0;
  double literal_residual = 0.0;  // with the literal + F(P R f, R v) term
  CommutatorReport report;
};
DecompositionF decompose_F(const Field& P, const Field& f, const Field& v);

struct DecompositionT {
  Field lhs;  // P T(Q, v)
  Field A_T;
  Field J_T;
  double residual = 0.0;
  // |A_T - (-Delta)_0^{-1/4} T*(P,Q)| up to the mean, and the (+1/4) reading.
  double reading_minus_quarter = 0.0;
  double reading_plus_quarter = 0.0;
  CommutatorReport report;
};
Field A_T(const Field& P, const Field& Q);
Field J_T(const Field& P, const Field& Q, const Field& v);
DecompositionT decompose_T(const Field& P, const Field& Q, const Field& v);

struct DecompositionS {
  Field lhs;  // P R S(Q, v)
  Field A_S;
  Field J_S;
  double residual = 0.0;
  double decS_residual = 0.0;     // R S = S~ + F(R D Q, v)
  double literal_residual = 0.0;  // literal grouping of the terms
  CommutatorReport report;
};
Field A_S(const Field& P, const Field& Q);
Field J_S(const Field& P, const Field& Q, const Field& v);
DecompositionS decompose_S(const Field& P, const Field& Q, const Field& v);

struct ProbeStats {
  std::string op;
  int trials = 0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  double scale_invariance = 0.0;  // worst relative change of the ratio under Q -> 10 Q
  std::vector<double> ratios;
};
// Ops: T, S, F, Lambda, Tstar, Sstar, Tbar.  Scalar inputs, zero mean, unit
// input norms; the target norm is the theorem's (or its proxy).
ProbeStats norm_ratio_probe(const std::string& op, int trials, int N, std::uint64_t seed,
                            bool constant_Q = false);

Field apply_named(const std::string& op, const Field& a, const Field& b);

}  // namespace hh
