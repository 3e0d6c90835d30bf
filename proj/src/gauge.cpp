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

#include "gauge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "commutators.hpp"

namespace hh {

namespace {

Field D(const Field& f) { return quarter(f); }
Field Dinv0(const Field& f) { return inv_frac_zero_mean(f, 0.5); }

double safe_rel(double num, double den) {
  return den > std::numeric_limits<double>::epsilon() ? num / den : num;
}

// a placed at (r0, c0) of an R x C zero field.
Field embed(const Field& a, int R, int C, int r0, int c0) {
  Field out(R, C, a.N());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.coeffs().row((r0 + i) * C + c0 + j) = a.coeffs().row(i * a.cols() + j);
  return out;
}

Field stack(const Field& a, const Field& b) {
  const int N = std::max(a.N(), b.N());
  return embed(a.with_bandwidth(N), a.rows() + b.rows(), 1, 0, 0) +
         embed(b.with_bandwidth(N), a.rows() + b.rows(), 1, a.rows(), 0);
}

Mat polar(const Mat& A) {
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat U = svd.matrixU();
  if ((U * svd.matrixV().transpose()).determinant() < 0.0) U.col(U.cols() - 1) *= -1.0;
  return U * svd.matrixV().transpose();
}

// Drops trailing modes below rel times the largest coefficient.
Field trim(const Field& f, double rel = 1e-13) {
  const double big = f.coeffs().cwiseAbs().maxCoeff();
  int N = f.N();
  while (N > 0 && f.coeffs().col(f.N() + N).cwiseAbs().maxCoeff() <= rel * big) --N;
  return f.with_bandwidth(N);
}

// Potential and Hardy parts of P K(Q, x).
Field potential_of(ZKind k, const Field& P, const Field& Q) {
  switch (k) {
    case ZKind::T: return A_T(P, Q);
    case ZKind::RS: return A_S(P, Q);
    case ZKind::F: return -op_Lambda(P, Q);
  }
  return {};
}

Field remainder_of(ZKind k, const Field& P, const Field& Q, const Field& x) {
  switch (k) {
    case ZKind::T: return J_T(P, Q, x);
    case ZKind::RS: return J_S(P, Q, x);
    case ZKind::F:
      // the mean of x survives R R on the circle
      return -op_F(mul(P, riesz(Q)), riesz(x)) + mul(riesz(mul(P, riesz(Q))), x.mean());
  }
  return {};
}

Field apply_kind(ZKind k, const Field& Q, const Field& x) {
  switch (k) {
    case ZKind::T: return op_T(Q, x);
    case ZKind::RS: return riesz(op_S(Q, x));
    case ZKind::F: return op_F(Q, x);
  }
  return {};
}

Field input_of(const ZTerm& t, const Field& v) { return t.riesz_input ? riesz(v) : v; }

double h_half(const Field& f) { return sobolev_norm(f, 0.5).inhomogeneous; }

}  // namespace

std::string to_string(ZKind k) {
  switch (k) {
    case ZKind::T: return "T";
    case ZKind::RS: return "RS";
    case ZKind::F: return "F";
  }
  return "?";
}

SchrodingerSystem SchrodingerSystem::zero(int m) {
  SchrodingerSystem s;
  s.Omega0 = Field(m, m, 0);
  s.Omega1 = Field(m, m, 0);
  s.g = Field(m, 1, 0);
  return s;
}

Field apply_Z(const SchrodingerSystem& sys, const Field& v) {
  Field z(sys.m(), 1, 0);
  for (const auto& t : sys.Z) z += t.weight * apply_kind(t.kind, t.Q, input_of(t, v));
  return z;
}

Field model_rhs(const SchrodingerSystem& sys, const Field& v) {
  return mul(sys.Omega0, v) + mul(sys.Omega1, v) + apply_Z(sys, v) + sys.g;
}

double model_residual(const SchrodingerSystem& sys, const Field& v) {
  return rel_residual(D(v), model_rhs(sys, v));
}

double antisymmetry_defect(const Field& A) {
  const GridField g = (A + A.transpose()).grid(fft_size(std::max(4 * A.N() + 1, 16)));
  return grid_linf_norm(g);
}

RotationDefect rotation_defect(const Field& A) {
  const GridField g = A.grid(fft_size(std::max(4 * A.N() + 1, 16)));
  RotationDefect r;
  r.min_det = std::numeric_limits<double>::infinity();
  r.min_singular = std::numeric_limits<double>::infinity();
  const Mat I = Mat::Identity(A.rows(), A.cols());
  for (int t = 0; t < g.M(); ++t) {
    const Mat a = g.matrix(t);
    r.orthogonality = std::max(r.orthogonality, (a.transpose() * a - I).norm());
    r.min_det = std::min(r.min_det, a.determinant());
    Eigen::JacobiSVD<Mat> svd(a);
    r.min_singular = std::min(r.min_singular, svd.singularValues().minCoeff());
  }
  return r;
}

Field gauge_lhs(const Field& P) {
  const Field X = mul(P.transpose(), D(P));
  return X - X.transpose();
}

double gauge_residual(const Field& P, const Field& Omega0) {
  const Field r = gauge_lhs(P) - 2.0 * Omega0;
  return safe_rel(l2_norm(r), 2.0 * l2_norm(Omega0));
}

namespace {

// Collocation form of the gauge equation on the 2K+1 nodes of the
// interpolant: r_j = X_j - X_j^T - 2 Omega0_j with X_j = P_j^T (D P)_j.
struct GaugeCollocation {
  int m, K, M, p;
  std::vector<std::pair<int, int>> pairs;
  Mat kernel;                // nodal matrix of D on the interpolant
  std::vector<Mat> target;  // 2 Omega0 at the nodes

  GaugeCollocation(const Field& Omega0, int K_) : m(Omega0.rows()), K(K_), M(2 * K_ + 1) {
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) pairs.emplace_back(a, b);
    p = static_cast<int>(pairs.size());
    kernel.resize(M, M);
    for (int j = 0; j < M; ++j)
      for (int l = 0; l < M; ++l) {
        double s = 0.0;
        for (int n = 1; n <= K; ++n) s += 2.0 * std::sqrt(n) * std::cos(kTwoPi * n * (j - l) / M);
        kernel(j, l) = s / M;
      }
    const GridField g = Omega0.with_bandwidth(K).grid(M);
    // Omega0 beyond the node band aliases; the continuous residual reports it.
    target.resize(M);
    for (int t = 0; t < M; ++t) target[t] = 2.0 * g.matrix(t);
  }

  std::vector<Mat> DP(const std::vector<Mat>& P) const {
    std::vector<Mat> out(M, Mat::Zero(m, m));
    for (int j = 0; j < M; ++j)
      for (int l = 0; l < M; ++l) out[j] += kernel(j, l) * P[l];
    return out;
  }

  Vec residual(const std::vector<Mat>& P, std::vector<Mat>* X = nullptr) const {
    const std::vector<Mat> dp = DP(P);
    Vec r(M * p);
    if (X) X->resize(M);
    for (int j = 0; j < M; ++j) {
      const Mat x = P[j].transpose() * dp[j];
      const Mat rj = x - x.transpose() - target[j];
      for (int q = 0; q < p; ++q) r(j * p + q) = rj(pairs[q].first, pairs[q].second);
      if (X) (*X)[j] = x;
    }
    return r;
  }

  // d r / d Y for P_j -> P_j (Id + Y_j), Y_j antisymmetric.
  Mat jacobian(const std::vector<Mat>& P, const std::vector<Mat>& X) const {
    Mat J = Mat::Zero(M * p, M * p);
    for (int j = 0; j < M; ++j)
      for (int l = 0; l < M; ++l) {
        const Mat C = P[j].transpose() * P[l];
        const double d = kernel(j, l);
        for (int c = 0; c < p; ++c) {
          const auto [a, b] = pairs[c];
          for (int q = 0; q < p; ++q) {
            const auto [ap, bp] = pairs[q];
            double v = (bp == b ? C(ap, a) : 0.0) - (bp == a ? C(ap, b) : 0.0) -
                       (ap == b ? C(bp, a) : 0.0) + (ap == a ? C(bp, b) : 0.0);
            J(j * p + q, l * p + c) = d * v;
          }
        }
      }
    for (int j = 0; j < M; ++j)
      for (int c = 0; c < p; ++c) {
        const auto [a, b] = pairs[c];
        Mat E = Mat::Zero(m, m);
        E(a, b) = 1.0;
        E(b, a) = -1.0;
        const Mat loc = -E * X[j] - X[j].transpose() * E;
        for (int q = 0; q < p; ++q) J(j * p + q, j * p + c) += loc(pairs[q].first, pairs[q].second);
      }
    return J;
  }

  Mat antisym(const Vec& y, int j) const {
    Mat Y = Mat::Zero(m, m);
    for (int q = 0; q < p; ++q) {
      Y(pairs[q].first, pairs[q].second) = y(j * p + q);
      Y(pairs[q].second, pairs[q].first) = -y(j * p + q);
    }
    return Y;
  }
};

}  // namespace

GaugeP solve_gauge_P(const Field& Omega0, const GaugeOptions& opts) {
  if (Omega0.rows() != Omega0.cols()) throw std::invalid_argument("Omega0 must be square");
  if (opts.tol <= 0.0 || opts.max_iter < 0) throw std::invalid_argument("bad gauge options");
  const int m = Omega0.rows();
  const int K = opts.N > 0 ? opts.N : std::max(24, 2 * Omega0.N() + 16);
  GaugeP out;
  out.omega_l2 = l2_norm(Omega0);
  out.omega_mean = l2_norm(Omega0.mean());
  out.small_data = out.omega_l2 < opts.smallness;
  const Mat I = Mat::Identity(m, m);
  const GaugeCollocation full(Omega0, K);
  const int M = full.M, p = full.p;

  auto to_field = [&](const std::vector<Mat>& nodes) {
    GridField g{m, m, Mat(m * m, M)};
    for (int t = 0; t < M; ++t) g.set_matrix(t, nodes[t]);
    return Field::from_grid(g, K);
  };

  std::vector<Mat> nodes(M, I);
  out.initial_residual = out.omega_l2 > 0.0 ? 1.0 : 0.0;
  if (m < 2 || out.omega_l2 == 0.0 || p == 0) {
    out.P = Field::identity(m, K);
    out.residual = gauge_residual(out.P, Omega0);
    out.converged = out.residual <= opts.tol;
    out.rotation = rotation_defect(out.P);
    return out;
  }

  // Gauss-Newton on the collocation system with node 0 pinned (left
  // multiplication by a constant rotation leaves the equation unchanged),
  // Armijo backtracking on |r|^2 and polar retraction.  The data are scaled
  // in from zero; a scale that does not converge is bisected.
  std::mt19937_64 rng(split_seed(opts.seed, 0x6761756765));
  const double disc_tol = 1e-13 * std::max(1.0, out.omega_l2);
  auto newton = [&](const GaugeCollocation& C, std::vector<Mat>& P, int budget, int* used) {
    std::vector<Mat> X;
    Vec r = C.residual(P, &X);
    double J0 = r.squaredNorm();
    for (int it = 0; it < budget; ++it) {
      ++*used;
      out.history.push_back(std::sqrt(J0));
      if (std::sqrt(J0) <= disc_tol) return true;
      const Mat Jf = C.jacobian(P, X);
      const Mat Jr = Jf.rightCols(Jf.cols() - p);
      const Mat N = Jr.transpose() * Jr;
      const Vec rhs = -(Jr.transpose() * r);
      Eigen::LDLT<Mat> ldlt(N);
      Vec y = Vec::Zero(Jf.cols());
      y.tail(Jf.cols() - p) = ldlt.solve(rhs);
      if (!y.allFinite()) return false;
      double t = 1.0;
      bool ok = false;
      for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
        std::vector<Mat> trial(M);
        for (int j = 0; j < M; ++j) trial[j] = P[j] * polar(I + t * C.antisym(y, j));
        std::vector<Mat> Xt;
        const Vec rt = C.residual(trial, &Xt);
        const double Jt = rt.squaredNorm();
        if (Jt <= (1.0 - 1e-4 * t) * J0) {
          P = std::move(trial);
          X = std::move(Xt);
          r = rt;
          J0 = Jt;
          ok = true;
          break;
        }
      }
      if (!ok) return std::sqrt(J0) <= 1e3 * disc_tol;
    }
    return std::sqrt(J0) <= disc_tol;
  };

  int used = 0;
  double done = 0.0, dt = 1.0;
  int failures = 0;
  while (done < 1.0 && used < opts.max_iter) {
    const double t = std::min(1.0, done + dt);
    GaugeCollocation C = full;
    for (auto& T : C.target) T *= t;
    std::vector<Mat> trial = nodes;
    if (newton(C, trial, std::min(40, opts.max_iter - used), &used)) {
      nodes = std::move(trial);
      done = t;
      dt = std::min(2.0 * dt, 1.0);
      continue;
    }
    dt *= 0.5;
    if (dt < 1e-4) {
      // Stalled: restart from a perturbed copy of the last good iterate.
      if (++failures > opts.restarts) break;
      out.restarts_used = failures;
      Field kick = random_field(m, m, std::min(K, 4), rng, 2.0, false);
      kick = kick - kick.transpose();
      const GridField kg = kick.grid(M);
      for (int j = 0; j < M; ++j) nodes[j] = nodes[j] * polar(I + 1e-2 * kg.matrix(j));
      dt = 0.25;
    }
  }
  if (done < 1.0 && used < opts.max_iter)
    newton(full, nodes, opts.max_iter - used, &used);
  out.iterations = used;
  out.P = trim(to_field(nodes));
  out.residual = gauge_residual(out.P, Omega0);
  if (!(out.residual < out.initial_residual)) {
    out.P = Field::identity(m, 0);
    out.residual = out.initial_residual;
  }
  out.converged = done >= 1.0 && out.residual <= opts.tol;
  out.rotation = rotation_defect(out.P);
  return out;
}

Varpi build_varpi(const Field& P, const SchrodingerSystem& sys, const Field& v) {
  const int m = sys.m();
  if (P.rows() != m || v.rows() != m) throw std::invalid_argument("gauge/system size mismatch");
  Varpi w;
  w.P = P;
  w.Pinv = P.transpose();
  const Field DP = D(P);
  Field A_Z(m, m, 0);
  Field J = op_T(P, v);
  for (const auto& t : sys.Z) {
    const Field x = input_of(t, v);
    const Field A = potential_of(t.kind, P, t.Q);
    const Field R = remainder_of(t.kind, P, t.Q, x);
    const Field lhs = mul(P, apply_kind(t.kind, t.Q, x));
    const Field Ax = mul(A, x);
    const double scale = std::max({l2_norm(lhs), l2_norm(Ax), l2_norm(R),
                                   std::numeric_limits<double>::epsilon()});
    w.decomposition_residuals.push_back(l2_norm(lhs - Ax - R) / scale);
    if (t.riesz_input) {
      // A(P,Q) R v is not a potential acting on v; it stays with J.
      J += t.weight * (mul(A, x) + R);
    } else {
      A_Z += t.weight * A;
      J += t.weight * R;
    }
  }
  w.A_Z = A_Z;
  w.J_TZ = J;
  w.varpi = mul(mul(P, sys.Omega1), w.Pinv) + mul(A_Z, w.Pinv) +
            mul(mul(P, sys.Omega0), w.Pinv) - mul(DP, w.Pinv);
  w.g_eff = D(v) - mul(sys.Omega0, v) - mul(sys.Omega1, v) - apply_Z(sys, v);
  w.model_residual = model_residual(sys, v);
  const Field Pv = mul(P, v);
  w.identity_residual =
      rel_residual(D(Pv), mul(w.varpi, Pv) + w.J_TZ + mul(P, w.g_eff));
  w.l21_proxy = lorentz_and_hardy_proxy(
      w.varpi.grid(fft_size(std::max(4 * w.varpi.N() + 1, 256))), ProxyKind::L21);
  return w;
}

Field omega_of(const Field& M, const Varpi& w, const SchrodingerSystem& sys) {
  Field om = A_T(M, w.P);
  for (const auto& t : sys.Z) {
    if (t.kind != ZKind::T || t.riesz_input) continue;
    om += t.weight * (A_T(M, mul(w.P, t.Q)) - mul(A_T(M, w.P), t.Q));
  }
  return om;
}

Field omega_tilde(const Field& M, const Varpi& w, const SchrodingerSystem& sys) {
  return mul(M, w.varpi) + mul(omega_of(M, w, sys), w.Pinv);
}

CorrectorE solve_corrector_E(const Varpi& w, const SchrodingerSystem& sys,
                             const CorrectorOptions& opts) {
  const int m = sys.m();
  const int NE = opts.N > 0 ? opts.N : std::max(8, w.varpi.N() + 4);
  const Field I = Field::identity(m, 0);
  CorrectorE out;
  // D annihilates constants, so only the zero-mean part of the corrector equation can hold;
  // E is kept zero-mean and the mean of omega~ is reported as zero_mode.
  auto residuals = [&](const Field& E) {
    const Field wt = omega_tilde(I + E, w, sys);
    const Field DE = D(E);
    out.zero_mode = wt.mean();
    out.residual = rel_residual(DE, wt - wt.mean());
    out.literal_residual = rel_residual(DE, wt);
    return wt;
  };

  Field E(m, m, NE);
  Field wt = residuals(E);
  out.history.push_back(out.residual);
  double prev_diff = -1.0;
  int growth = 0;
  int it = 0;
  for (; it < opts.max_iter && out.residual > opts.tol; ++it) {
    Field next = Dinv0(wt);
    if (next.N() > NE) next = next.with_bandwidth(NE);
    const double diff = l2_norm(next - E);
    if (prev_diff > 0.0) {
      const double q = diff / prev_diff;
      out.contraction = it > 2 ? std::max(out.contraction, q) : q;
      growth = q >= 1.0 ? growth + 1 : 0;
    }
    prev_diff = diff;
    E = std::move(next);
    wt = residuals(E);
    out.history.push_back(out.residual);
    if (growth >= 3 || !std::isfinite(out.residual)) {
      out.diverged = true;
      ++it;
      break;
    }
  }
  out.iterations = it;

  if (out.diverged && opts.direct_fallback) {
    // omega~ is linear in M and acts on each row of M separately, so
    // (D - Pi_0 omega~) E_i = Pi_0 omega~(e_i) is solved row by row.
    Field basis_row(1, m, 0);
    auto row_op = [&](const Field& r) {
      const Field o = omega_tilde(r, w, sys);
      return D(r) - (o - o.mean());
    };
    std::vector<Field> cols;
    int No = 0;
    for (int k = 0; k < m; ++k)
      for (int n = 1; n <= NE; ++n)
        for (int part = 0; part < 2; ++part) {
          Field X(1, m, NE);
          X.set_mode(k, n, part == 0 ? cd(1.0, 0.0) : cd(0.0, 1.0));
          cols.push_back(row_op(X));
          No = std::max(No, cols.back().N());
        }
    auto coords = [&](const Field& f) {
      const Field g = f.with_bandwidth(std::max(No, f.N())).with_bandwidth(No);
      Vec c(m * 2 * No);
      int r = 0;
      for (int k = 0; k < m; ++k)
        for (int n = 1; n <= No; ++n) {
          c(r++) = g.coef(k, n).real();
          c(r++) = g.coef(k, n).imag();
        }
      return c;
    };
    Mat A(m * 2 * No, static_cast<int>(cols.size()));
    for (int j = 0; j < A.cols(); ++j) A.col(j) = coords(cols[j]);
    Eigen::CompleteOrthogonalDecomposition<Mat> solver(A);
    Field Ed(m, m, NE);
    for (int i = 0; i < m; ++i) {
      Mat ei = Mat::Zero(1, m);
      ei(0, i) = 1.0;
      const Field o = omega_tilde(Field::constant(ei, 0), w, sys);
      const Vec x = solver.solve(coords(o - o.mean()));
      int j = 0;
      for (int k = 0; k < m; ++k)
        for (int n = 1; n <= NE; ++n, j += 2)
          Ed.set_mode(i * m + k, n, cd(x(j), x(j + 1)));
    }
    E = Ed;
    wt = residuals(E);
    out.history.push_back(out.residual);
    out.direct = true;
  }
  out.E = trim(E, 1e-13);
  out.linf = linf_norm(out.E);
  out.converged = out.residual <= opts.tol;
  return out;
}

Conservation verify_conservation(const Field& E, const Varpi& w, const SchrodingerSystem& sys,
                                 const Field& v) {
  const int m = sys.m();
  Conservation c;
  const Field M = Field::identity(m, 0) + E;
  const Field Pv = mul(w.P, v);
  c.A = mul(M, w.P);
  c.lhs = D(mul(c.A, v));
  const Field G = mul(M, w.J_TZ) - mul(omega_of(M, w, sys), v);
  const Field wt = omega_tilde(M, w, sys);
  c.zero_mode_term = mul(wt.mean(), Pv);
  c.J = op_T(M, Pv) + G + c.zero_mode_term;
  c.Ag = mul(c.A, sys.g);
  c.residual = rel_residual(c.lhs, c.J + c.Ag);
  c.literal_residual = rel_residual(c.lhs, c.J - c.zero_mode_term + c.Ag);
  const Field defect = c.lhs - c.J - c.Ag;
  const Field eps_defect = wt - wt.mean() - D(E);
  const Field predicted = mul(eps_defect, Pv) + mul(c.A, w.g_eff - sys.g);
  const double scale = std::max({l2_norm(c.lhs), l2_norm(c.J + c.Ag),
                                 std::numeric_limits<double>::epsilon()});
  c.propagated = l2_norm(predicted) / scale;
  c.consistency = l2_norm(defect - predicted) / scale;
  double B = h_half(M) + h_half(w.P);
  for (const auto& t : sys.Z) B += std::abs(t.weight) * h_half(t.Q);
  const double den = B * l2_norm(v);
  const double num = lorentz_and_hardy_proxy(
      c.J.grid(fft_size(std::max(4 * c.J.N() + 1, 256))), ProxyKind::H1proxy);
  c.hardy_ratio = safe_rel(num, den);
  return c;
}

GaugeSolution solve_gauge_system(const SchrodingerSystem& sys, const Field& v,
                                 const GaugeOptions& gopts, const CorrectorOptions& copts) {
  GaugeSolution s;
  s.gauge = solve_gauge_P(sys.Omega0, gopts);
  s.varpi = build_varpi(s.gauge.P, sys, v);
  s.corrector = solve_corrector_E(s.varpi, sys, copts);
  s.conservation = verify_conservation(s.corrector.E, s.varpi, sys, v);
  s.residual_gauge = s.gauge.residual;
  s.residual_corrector = s.corrector.residual;
  s.zero_mode = l2_norm(s.corrector.zero_mode);
  s.residual_conservation = s.conservation.residual;
  s.min_singular_A = rotation_defect(s.conservation.A).min_singular;
  return s;
}

Field projection_along(const Field& u, const ProjectionField& Dist, int N) {
  const int M = fft_size(std::max(4 * N + 1, 2 * u.N() + 1));
  const GridField g = u.grid(M);
  const int m = Dist.m();
  GridField o{m, m, Mat(m * m, M)};
  for (int t = 0; t < M; ++t) o.set_matrix(t, Dist.PT(g.values.col(t)));
  return trim(Field::from_grid(o, N));
}

Uniqueness uniqueness_operator(const Field& PT, int N) {
  if (N < 1) throw std::invalid_argument("bandwidth must be >= 1");
  const int m = PT.rows();
  const Field PN = Field::identity(m, 0) - PT;
  const int No = N + PT.N();
  const int rows = m * (2 * No + 1);
  Mat A(rows, m * 2 * N);
  const double a = 1.0 / std::sqrt(4.0 * kPi);
  int col = 0;
  for (int k = 0; k < m; ++k)
    for (int n = 1; n <= N; ++n)
      for (int part = 0; part < 2; ++part) {
        Field f = Field::vector(m, N);
        f.set_mode(k, n, part == 0 ? cd(a, 0.0) : cd(0.0, a));
        const Field y = (mul(PT, f) + mul(PN, riesz(f))).with_bandwidth(No);
        int row = 0;
        for (int j = 0; j < m; ++j) {
          A(row++, col) = std::sqrt(kTwoPi) * y.coef(j, 0).real();
          for (int q = 1; q <= No; ++q) {
            A(row++, col) = std::sqrt(4.0 * kPi) * y.coef(j, q).real();
            A(row++, col) = std::sqrt(4.0 * kPi) * y.coef(j, q).imag();
          }
        }
        ++col;
      }
  Eigen::JacobiSVD<Mat> svd(A);
  Uniqueness u;
  u.sigma_min = svd.singularValues().minCoeff();
  u.sigma_max = svd.singularValues().maxCoeff();
  const double e = l2_norm(D(PT));
  u.energy = e * e;
  return u;
}

Uniqueness uniqueness_operator_sigma_min(const Field& u, const ProjectionField& Dist, int N,
                                         int N_projection) {
  const int NP = N_projection > 0 ? N_projection : 8 * u.N() + 16;
  return uniqueness_operator(projection_along(u, Dist, NP), N);
}

std::vector<SweepRow> uniqueness_sweep(const Field& u, const ProjectionField& Dist, int N,
                                       int samples, double s_max) {
  if (samples < 2) throw std::invalid_argument("sweep needs at least 2 samples");
  std::vector<SweepRow> rows;
  const int m = Dist.m();
  for (int i = 0; i < samples; ++i) {
    const double s = s_max * i / (samples - 1);
    const int NP = 8 * (static_cast<int>(std::ceil(s * u.N())) + 1) + 16;
    const int M = fft_size(4 * NP + 1);
    GridField o{m, m, Mat(m * m, M)};
    for (int t = 0; t < M; ++t)
      o.set_matrix(t, Dist.PT(u.eval(s * std::sin(kTwoPi * t / M))));
    const Uniqueness q = uniqueness_operator(Field::from_grid(o, NP), N);
    rows.push_back({s, q.energy, q.sigma_min});
  }
  return rows;
}

EulerSystem assemble_euler_system(const ProjectionField& Dist, const Field& u,
                                  double horizontality_tol, int N_projection) {
  const int m = Dist.m();
  if (u.rows() != m || u.cols() != 1) throw std::invalid_argument("loop dimension mismatch");
  const int NP = N_projection > 0 ? N_projection : 8 * u.N() + 16;
  const Field PT = projection_along(u, Dist, NP);
  const Field I = Field::identity(m, 0);
  const Field PN = I - PT;
  const Field du = ddtheta(u);
  const Field k = mul(PN, du);
  EulerSystem e;
  e.horizontality = safe_rel(l2_norm(k), l2_norm(du));
  if (e.horizontality > horizontality_tol)
    throw std::invalid_argument("loop is not horizontal (relative |P_N u'| = " +
                                std::to_string(e.horizontality) + ")");
  const Field w = D(u);
  const Field G = D(PT);
  const Field RG = riesz(G);
  const Field v1 = mul(PT, w);
  const Field n = mul(PN, w);
  const Field v2 = riesz(n);
  const Field h = mul(PT, D(w));
  e.half_harmonic = safe_rel(l2_norm(h), l2_norm(D(w)));
  e.v = stack(v1, v2);

  e.Cv = stack(op_T(PT, w), riesz(op_S(PN, w)));
  e.Dv = -0.5 * stack(op_F(G, n), op_F(G, riesz(v1)));
  e.Omega_tilde = e.Cv - 2.0 * e.Dv;

  const Field W = mul(mul(PT, G), PN) - mul(mul(PN, G), PT);
  const int m2 = 2 * m;
  e.Omega = embed(W, m2, m2, 0, 0) + embed(-RG, m2, m2, 0, m) + embed(RG, m2, m2, m, 0) +
            embed(W, m2, m2, m, m);
  const Field B = -1.0 * G - W;
  e.Omega1 = embed(B, m2, m2, 0, 0) + embed(B, m2, m2, m, m);

  const Field v1bar = v1.mean();
  const Field c2 = mul(G, riesz(w)).mean() - mul(RG, v1bar);
  e.mean_correction = stack(Field(m, 1, 0), c2);

  const Field Dv = D(e.v);
  const Field rhs = e.Omega_tilde + mul(e.Omega1, e.v) + mul(e.Omega, e.v);
  e.residual = rel_residual(Dv, rhs + e.mean_correction);
  e.residual_no_mean = rel_residual(Dv, rhs);
  e.antisymmetry = antisymmetry_defect(e.Omega);

  // C with the literal entry signs: +T(P_T, R v2) in the first row and
  // R D{P_N} - P_N D R - D[P_N] R, D{P_N} + P_N D - D[P_N] in the second.
  const Field Rv1 = riesz(v1);
  const Field lit1 = op_T(PT, v1) + op_T(PT, riesz(v2));
  const Field lit2 = riesz(D(mul(PN, v1))) - mul(PN, D(Rv1)) + mul(G, Rv1) + D(mul(PN, v2)) +
                     mul(PN, D(v2)) + mul(G, v2);
  e.literal_C_residual = rel_residual(stack(lit1, lit2), e.Cv);

  // The model system in v: Omega0 takes the zero-mean part of Omega.
  SchrodingerSystem& s = e.system;
  s.Omega0 = trim(e.Omega - e.Omega.mean());
  s.Omega1 = trim(e.Omega1 + e.Omega.mean());
  s.Z.push_back({ZKind::T, embed(PT, m2, m2, 0, 0), 1.0, false, "T(P_T, v1)"});
  s.Z.push_back({ZKind::T, embed(PT, m2, m2, 0, m), -1.0, true, "T(P_T, R v2)"});
  s.Z.push_back({ZKind::F, embed(G, m2, m2, 0, m), -1.0, true, "F(G, R v2)"});
  s.Z.push_back({ZKind::RS, embed(PN, m2, m2, m, 0), 1.0, false, "R S(P_N, v1)"});
  s.Z.push_back({ZKind::RS, embed(PN, m2, m2, m, m), -1.0, true, "R S(P_N, R v2)"});
  s.Z.push_back({ZKind::F, embed(G, m2, m2, m, 0), 1.0, true, "F(G, R v1)"});
  // w = v1 - R v2 - mean(v1): the constant parts of the commutators and the
  // horizontality and half-harmonicity defects form the source.
  const Field zc = stack(-1.0 * mul(G, v1bar), mul(RG, v1bar));
  s.g = stack(h, -1.0 * k + k.mean()) + e.mean_correction + zc;
  e.omega0_l2 = l2_norm(s.Omega0);
  return e;
}

}  // namespace hh
