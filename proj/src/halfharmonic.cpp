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

#include "halfharmonic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>
#include <unsupported/Eigen/NonLinearOptimization>

namespace hh {

namespace {

struct Sizes {
  int Nw = 0;
  int M = 0;
};

Sizes work_sizes(const HalfHarmonicOptions& o, std::initializer_list<int> bands) {
  int Nmax = 1;
  for (int b : bands) Nmax = std::max(Nmax, b);
  Sizes s;
  s.Nw = o.work_N > 0 ? o.work_N : 4 * Nmax + 8;
  s.M = o.nodes > 0 ? o.nodes : fft_size(4 * s.Nw + 1);
  if (s.M < 2 * s.Nw + 1) throw std::invalid_argument("too few nodes for work bandwidth");
  return s;
}

struct LoopSamples {
  int M = 0;
  Mat u, du;
  std::vector<Mat> PT;
  std::vector<std::vector<Mat>> dPT;
};

LoopSamples sample_loop(const Field& u, const ProjectionField& D, int M, bool deriv) {
  LoopSamples s;
  s.M = M;
  s.u = u.grid(M).values;
  s.du = ddtheta(u).grid(M).values;
  s.PT.resize(M);
  if (deriv) s.dPT.resize(M);
  for (int t = 0; t < M; ++t) {
    const Vec z = s.u.col(t);
    s.PT[t] = D.PT(z);
    if (deriv) s.dPT[t] = D.dPT(z);
  }
  return s;
}

Mat apply_T(const LoopSamples& s, const Mat& X) {
  Mat Y(X.rows(), X.cols());
  for (int t = 0; t < s.M; ++t) Y.col(t) = s.PT[t] * X.col(t);
  return Y;
}

Mat apply_N(const LoopSamples& s, const Mat& X) { return X - apply_T(s, X); }

Mat along(const LoopSamples& s, int t, const Vec& w) {
  Mat d = Mat::Zero(s.PT[t].rows(), s.PT[t].cols());
  for (int k = 0; k < w.size(); ++k) d += w(k) * s.dPT[t][k];
  return d;
}

Field analyze(const Mat& X, int Nw) {
  return Field::from_grid(GridField{static_cast<int>(X.rows()), 1, X}, Nw);
}

Mat samples(const Field& f, int M) { return f.grid(M).values; }

Field dm(const Field& f) { return inv_frac_zero_mean(f, 0.5); }
Field dm2(const Field& f) { return inv_frac_zero_mean(f, 1.0); }

double grid_norm(const Mat& X) {
  return std::sqrt(kTwoPi / X.cols()) * X.norm();
}

// sum_k w_k dP_k at every node, as a list.
std::vector<Mat> directional(const LoopSamples& s, const Mat& W) {
  std::vector<Mat> out(s.M);
  for (int t = 0; t < s.M; ++t) out[t] = along(s, t, W.col(t));
  return out;
}

Mat apply_list(const std::vector<Mat>& P, const Mat& X) {
  Mat Y(P.empty() ? 0 : P[0].rows(), X.cols());
  for (int t = 0; t < X.cols(); ++t) Y.col(t) = P[t] * X.col(t);
  return Y;
}

}  // namespace

Field exhalf(int N) {
  Field u = Field::vector(4, std::max(N, 1));
  const double s = 1.0 / std::sqrt(2.0);
  // cos, sin, cos, -sin
  u.set_mode(0, 1, cd(0.5 * s, 0.0));
  u.set_mode(1, 1, cd(0.0, -0.5 * s));
  u.set_mode(2, 1, cd(0.5 * s, 0.0));
  u.set_mode(3, 1, cd(0.0, 0.5 * s));
  return u;
}

Field perturbed_exhalf(double eps, std::uint64_t seed, int N) {
  std::mt19937_64 rng(split_seed(seed, 0x68616c66));
  Field p = random_field(4, 1, N, rng, 2.0, true);
  for (int k = 0; k < 4; ++k)
    for (int n = 0; n <= N; n += 2) p.set_mode(k, n, cd(0.0, 0.0));
  const double s = linf_norm(p);
  return exhalf(N) + (eps / s) * p;
}

double half_energy(const Field& u) {
  double s = 0.0;
  for (int n = -u.N(); n <= u.N(); ++n)
    s += std::abs(n) * u.coeffs().col(n + u.N()).squaredNorm();
  return kTwoPi * s;
}

bool radius_constraint_active(const Field& u, const ProjectionField& D,
                              RadiusMode mode) {
  if (mode != RadiusMode::Auto) return mode == RadiusMode::On;
  const GridField g = u.grid(fft_size(std::max(2 * u.N() + 1, 8)));
  for (int t = 0; t < g.M(); ++t) {
    const Vec z = g.values.col(t);
    if (z.norm() < 1e-12) return false;
    try {
      if ((D.PT(2.0 * z) - D.PT(z)).norm() > 1e-10) return false;
    } catch (const std::domain_error&) {
      return false;
    }
  }
  return true;
}

ConstrainedPair make_pair(const Field& u, const Field& xi, const ProjectionField& D,
                          const HalfHarmonicOptions& opts) {
  const Sizes sz = work_sizes(opts, {u.N(), xi.N()});
  const LoopSamples s = sample_loop(u, D, sz.M, false);
  ConstrainedPair p{u, xi};
  const Mat X = samples(xi, sz.M);
  p.pairing_residual = (kTwoPi / sz.M * apply_N(s, s.du).rowwise().sum()).norm();
  p.tangent_xi_norm = l2_norm(dm(analyze(apply_T(s, X), sz.Nw)));
  p.tangent_du_norm = l2_norm(dm(analyze(apply_T(s, s.du), sz.Nw)));
  return p;
}

L12Terms lagrangian_terms(const ConstrainedPair& p, const ProjectionField& D,
                          const HalfHarmonicOptions& opts) {
  const Sizes sz = work_sizes(opts, {p.u.N(), p.xi.N()});
  const LoopSamples s = sample_loop(p.u, D, sz.M, false);
  const Mat X = samples(p.xi, sz.M);
  const Field A = dm(analyze(apply_T(s, X), sz.Nw));
  const Field B = dm(analyze(apply_T(s, s.du), sz.Nw));
  const Field C = dm(analyze(apply_N(s, X), sz.Nw));
  const Field E = dm(analyze(apply_N(s, s.du), sz.Nw));
  L12Terms r;
  r.tangent_energy = 0.5 * inner(A, A);
  r.tangent_cross = -inner(A, B);
  r.normal_cross = -inner(C, E);
  return r;
}

double lagrangian_L12(const ConstrainedPair& p, const ProjectionField& D,
                      const HalfHarmonicOptions& opts) {
  return lagrangian_terms(p, D, opts).value();
}

namespace {

Vec linearized_constraint_on(const LoopSamples& s, const Field& w, int M) {
  const Mat W = samples(w, M);
  const Mat dW = samples(ddtheta(w), M);
  Vec acc = Vec::Zero(W.rows());
  for (int t = 0; t < M; ++t)
    acc += dW.col(t) - s.PT[t] * dW.col(t) - along(s, t, W.col(t)) * s.du.col(t);
  return kTwoPi / M * acc;
}

}  // namespace

Vec linearized_constraint(const Field& u, const ProjectionField& D, const Field& w,
                          const HalfHarmonicOptions& opts) {
  const Sizes sz = work_sizes(opts, {u.N(), w.N()});
  const LoopSamples s = sample_loop(u, D, sz.M, true);
  return linearized_constraint_on(s, w, sz.M);
}

Field admissible_direction(const Field& u, const ProjectionField& D, const Field& raw,
                           const HalfHarmonicOptions& opts) {
  const int m = u.m();
  const int Nb = std::max(raw.N(), 2);
  const bool radius = radius_constraint_active(u, D, opts.radius);
  const Sizes sz = work_sizes(opts, {u.N(), Nb});
  const LoopSamples s = sample_loop(u, D, sz.M, true);
  const int q = m + (radius ? 1 : 0);
  auto gate = [&](const Field& w) {
    Vec g(q);
    g.head(m) = linearized_constraint_on(s, w, sz.M);
    if (radius) g(m) = inner(u.with_bandwidth(Nb), w.with_bandwidth(Nb));
    return g;
  };
  std::vector<Field> basis;
  for (int k = 0; k < m; ++k) {
    for (int n = 0; n <= 2; ++n) {
      Field b = Field::vector(m, Nb);
      b.set_mode(k, n, cd(n == 0 ? 1.0 : 0.5, 0.0));
      basis.push_back(b);
      if (n == 0) continue;
      Field c = Field::vector(m, Nb);
      c.set_mode(k, n, cd(0.0, -0.5));
      basis.push_back(c);
    }
  }
  Mat G(q, static_cast<int>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) G.col(j) = gate(basis[j]);
  const Field w0 = raw.with_bandwidth(Nb);
  const Vec beta = G.completeOrthogonalDecomposition().solve(gate(w0));
  Field w = w0;
  for (std::size_t j = 0; j < basis.size(); ++j) w -= beta(j) * basis[j];
  return w;
}

FirstVariation first_variation(const ConstrainedPair& p, const ProjectionField& D,
                               const Field& w, const Field& eta,
                               const HalfHarmonicOptions& opts, double gate_tol) {
  const Sizes sz = work_sizes(opts, {p.u.N(), p.xi.N(), w.N(), eta.N()});
  const LoopSamples s = sample_loop(p.u, D, sz.M, true);
  FirstVariation r;
  double g = linearized_constraint_on(s, w, sz.M).norm();
  if (radius_constraint_active(p.u, D, opts.radius)) {
    const int Nb = std::max(p.u.N(), w.N());
    g += std::abs(inner(p.u.with_bandwidth(Nb), w.with_bandwidth(Nb)));
  }
  r.gate = g;
  if (g > gate_tol)
    throw std::invalid_argument("direction fails the linearized constraint gate");

  const int Nw = sz.Nw;
  const int M = sz.M;
  const Mat X = samples(p.xi, M);
  const Mat H = samples(eta, M);
  const Mat W = samples(w, M);
  const Mat dW = samples(ddtheta(w), M);
  auto An = [&](const Mat& Y) { return dm(analyze(Y, Nw)); };

  const Field A = An(apply_T(s, X));
  const Field B = An(apply_T(s, s.du));
  const Field C = An(apply_N(s, X));
  const Field E = An(apply_N(s, s.du));

  r.d_xi = inner(A, An(apply_T(s, H))) - inner(An(apply_T(s, H)), B) -
           inner(An(apply_N(s, H)), E);

  const std::vector<Mat> dP = directional(s, W);
  const Field dPxi = An(apply_list(dP, X));
  const Field dPdu = An(apply_list(dP, s.du));
  r.d_u = inner(A, dPxi) - inner(dPxi, B) - inner(A, dPdu) + inner(dPxi, E) +
          inner(C, dPdu) - inner(A, An(apply_T(s, dW))) - inner(C, An(apply_N(s, dW)));
  return r;
}

double ELReport::max_residual() const {
  return std::max({el_tangent, el_normal, horizontality, xi_drift, multiplier_fit, riesz_form, projected_riesz_form,
                   projected_normal, riesz_form_consistency, half_harmonic});
}

ELReport el_residuals(const ConstrainedPair& p, const ProjectionField& D,
                      const HalfHarmonicOptions& opts) {
  const Sizes sz = work_sizes(opts, {p.u.N(), p.xi.N()});
  const int Nw = sz.Nw, M = sz.M, m = p.u.m();
  const LoopSamples s = sample_loop(p.u, D, M, true);
  ELReport r;
  r.radius_constraint = radius_constraint_active(p.u, D, opts.radius);

  const Mat X = samples(p.xi, M);
  const Field PTxi = analyze(apply_T(s, X), Nw);
  const Field PNxi = analyze(apply_N(s, X), Nw);
  const Mat XT = samples(dm2(PTxi), M);
  const Mat XN = samples(dm2(PNxi), M);

  r.el_tangent = grid_norm(apply_T(s, XT - samples(dm2(analyze(apply_T(s, s.du), Nw)), M)));
  r.el_normal = grid_norm(apply_N(s, samples(dm2(analyze(apply_N(s, s.du), Nw)), M)));
  r.horizontality = grid_norm(apply_N(s, s.du));
  r.xi_drift = l2_norm(analyze(apply_T(s, X) - s.du, Nw).without_mean());

  // LHS - base = sum_i lambda_i B_i + mu u.
  const Mat Y = apply_T(s, XT) + apply_N(s, XN);
  const Mat lhs = samples(ddtheta(analyze(Y, Nw)), M);
  Mat G(m * M, m + 1);
  Vec rhs(m * M);
  for (int t = 0; t < M; ++t) {
    const Vec du = s.du.col(t);
    const Vec diff = XT.col(t) - XN.col(t);
    Mat dDu = Mat::Zero(m, m);  // sum_j u'_j dP_j
    for (int j = 0; j < m; ++j) dDu += du(j) * s.dPT[t][j];
    for (int k = 0; k < m; ++k) {
      const Vec dk = s.dPT[t][k] * du;
      rhs(t * m + k) = lhs(k, t) - diff.dot(dk);
      for (int i = 0; i < m; ++i) G(t * m + k, i) = dk(i) - dDu(i, k);
      G(t * m + k, m) = s.u(k, t);
    }
  }
  const double scale = std::sqrt(kTwoPi / M);
  {
    const Mat Gl = G.leftCols(m);
    const Vec lam = Gl.completeOrthogonalDecomposition().solve(rhs);
    r.multiplier_fit_no_radius = scale * (rhs - Gl * lam).norm();
  }
  Vec lam(m);
  if (r.radius_constraint) {
    const Vec sol = G.completeOrthogonalDecomposition().solve(rhs);
    lam = sol.head(m);
    r.radius_multiplier = sol(m);
  } else {
    lam = G.leftCols(m).completeOrthogonalDecomposition().solve(rhs);
  }
  r.lambda = lam;
  r.multiplier_fit = scale * (rhs - G.leftCols(m) * lam - r.radius_multiplier * G.col(m)).norm();

  // Riesz form of the equation and its tangential projection.
  const Mat RT = samples(riesz(PTxi), M);
  const Mat RN = samples(riesz(PNxi), M);
  const Mat lhs_r = apply_T(s, RT) + apply_N(s, RN);
  const Mat w = apply_T(s, X);
  Mat r_full(m, M), r_alt(m, M), r_tan(m, M), cons(m, M);
  for (int t = 0; t < M; ++t) {
    const Vec yc = XT.col(t) - XN.col(t) + lam;
    const Vec yd = -XT.col(t) - XN.col(t) + lam;
    Mat om(m, m), omd(m, m);
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j) {
        const Vec c = s.dPT[t][k].col(j) - s.dPT[t][j].col(k);
        om(k, j) = c.dot(yc);
        omd(k, j) = c.dot(yd);
      }
    const Mat& P = s.PT[t];
    const Mat Om = P * om * P;
    r.omega_antisymmetry = std::max(r.omega_antisymmetry, (om + om.transpose()).cwiseAbs().maxCoeff());
    r.Omega_antisymmetry = std::max(r.Omega_antisymmetry, (Om + Om.transpose()).cwiseAbs().maxCoeff());
    const Vec mu_u = r.radius_multiplier * s.u.col(t);
    r_full.col(t) = lhs_r.col(t) - om * w.col(t) - mu_u;
    r_alt.col(t) = lhs_r.col(t) - omd * w.col(t) - mu_u;
    r_tan.col(t) = P * RT.col(t) - Om * w.col(t) - P * mu_u;
    cons.col(t) = P * r_full.col(t) - r_tan.col(t);
  }
  r.riesz_form = grid_norm(r_full);
  r.riesz_form_alt_sign = grid_norm(r_alt);
  r.projected_riesz_form = grid_norm(r_tan);
  r.projected_normal = grid_norm(apply_N(s, w));
  r.riesz_form_consistency = grid_norm(cons);
  r.half_harmonic = grid_norm(apply_T(s, samples(lap_pow(p.u, 0.5), M)));
  return r;
}

double half_harmonic_residual(const Field& u, const ProjectionField& D) {
  const int M = fft_size(std::max(4 * u.N() + 1, 32));
  const Mat U = samples(u, M);
  const Mat L = samples(lap_pow(u, 0.5), M);
  Mat r(U.rows(), M);
  for (int t = 0; t < M; ++t) r.col(t) = D.PT(U.col(t)) * L.col(t);
  return grid_norm(r);
}


bool antipodal_class_active(const Field& u, const ProjectionField& D, SymmetryMode mode) {
  if (mode != SymmetryMode::Auto) return mode == SymmetryMode::Antipodal;
  for (int k = 0; k < u.m(); ++k)
    for (int n = 0; n <= u.N(); n += 2)
      if (std::abs(u.coef(k, n)) > 1e-14) return false;
  const GridField g = u.grid(fft_size(std::max(2 * u.N() + 1, 8)));
  for (int t = 0; t < g.M(); ++t) {
    const Vec z = g.values.col(t);
    try {
      if ((D.PT(-z) - D.PT(z)).norm() > 1e-12) return false;
    } catch (const std::domain_error&) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------- solver

namespace {

struct ALProblem {
  const ProjectionField& D;
  int m, N, M;
  bool radius;
  double R;
  double rho = 1.0;
  Mat mu;
  double muR = 0.0;
  Mat cosT, sinT;  // (N+1) x M
  std::vector<int> active;  // free entries of the full coefficient vector

  ALProblem(const ProjectionField& D_, int m_, int N_, int M_, bool radius_, double R_)
      : D(D_), m(m_), N(N_), M(M_), radius(radius_), R(R_), mu(Mat::Zero(m_, M_)) {
    cosT.resize(N + 1, M);
    sinT.resize(N + 1, M);
    for (int n = 0; n <= N; ++n)
      for (int t = 0; t < M; ++t) {
        cosT(n, t) = std::cos(kTwoPi * n * t / M);
        sinT(n, t) = std::sin(kTwoPi * n * t / M);
      }
  }

  int full_inputs() const { return m * (2 * N + 1); }
  int inputs() const { return static_cast<int>(active.size()); }
  int values() const { return 2 * m * N + m * M + (radius ? 1 : 0); }
  int idx(int k, int slot) const { return k * (2 * N + 1) + slot; }

  void synth(const Vec& x, Mat& u, Mat& du) const {
    u.setZero(m, M);
    du.setZero(m, M);
    for (int k = 0; k < m; ++k) {
      u.row(k).setConstant(x(idx(k, 0)));
      for (int n = 1; n <= N; ++n) {
        const double a = x(idx(k, n)), b = x(idx(k, N + n));
        u.row(k) += 2.0 * (a * cosT.row(n) - b * sinT.row(n));
        du.row(k) += -2.0 * n * (a * sinT.row(n) + b * cosT.row(n));
      }
    }
  }

  Mat constraint(const Mat& u, const Mat& du) const {
    Mat c(m, M);
    for (int t = 0; t < M; ++t) c.col(t) = du.col(t) - D.PT(u.col(t)) * du.col(t);
    return c;
  }

  double radius_gap(const Vec& x) const {
    double s = 0.0;
    for (int k = 0; k < m; ++k) {
      s += x(idx(k, 0)) * x(idx(k, 0));
      for (int n = 1; n <= N; ++n)
        s += 2.0 * (x(idx(k, n)) * x(idx(k, n)) + x(idx(k, N + n)) * x(idx(k, N + n)));
    }
    return s - R * R;
  }

  double energy(const Vec& x) const {
    double e = 0.0;
    for (int k = 0; k < m; ++k)
      for (int n = 1; n <= N; ++n)
        e += 4.0 * kPi * n * (x(idx(k, n)) * x(idx(k, n)) + x(idx(k, N + n)) * x(idx(k, N + n)));
    return e;
  }

  Vec expand(const Vec& y) const {
    Vec x = Vec::Zero(full_inputs());
    for (std::size_t i = 0; i < active.size(); ++i) x(active[i]) = y(i);
    return x;
  }

  Vec restrict(const Vec& x) const {
    Vec y(inputs());
    for (std::size_t i = 0; i < active.size(); ++i) y(i) = x(active[i]);
    return y;
  }

  int operator()(const Vec& y, Vec& f) const { return eval_full(expand(y), f); }

  int df(const Vec& y, Mat& J) const {
    Mat Jf;
    jacobian_full(expand(y), Jf);
    J.resize(values(), inputs());
    for (std::size_t i = 0; i < active.size(); ++i) J.col(i) = Jf.col(active[i]);
    return 0;
  }

  int eval_full(const Vec& x, Vec& f) const {
    f.resize(values());
    for (int k = 0; k < m; ++k)
      for (int n = 1; n <= N; ++n) {
        const double s = std::sqrt(4.0 * kPi * n);
        f(k * 2 * N + n - 1) = s * x(idx(k, n));
        f(k * 2 * N + N + n - 1) = s * x(idx(k, N + n));
      }
    Mat u, du;
    synth(x, u, du);
    const Mat c = constraint(u, du);
    const double sc = std::sqrt(kTwoPi / M * rho / 2.0);
    const int off = 2 * m * N;
    for (int t = 0; t < M; ++t)
      for (int p = 0; p < m; ++p) f(off + t * m + p) = sc * (c(p, t) + mu(p, t) / rho);
    if (radius) f(off + m * M) = std::sqrt(rho / 2.0) * (radius_gap(x) + muR / rho);
    return 0;
  }

  void jacobian_full(const Vec& x, Mat& J) const {
    J.setZero(values(), full_inputs());
    for (int k = 0; k < m; ++k)
      for (int n = 1; n <= N; ++n) {
        const double s = std::sqrt(4.0 * kPi * n);
        J(k * 2 * N + n - 1, idx(k, n)) = s;
        J(k * 2 * N + N + n - 1, idx(k, N + n)) = s;
      }
    Mat u, du;
    synth(x, u, du);
    const double sc = std::sqrt(kTwoPi / M * rho / 2.0);
    const int off = 2 * m * N;
    for (int t = 0; t < M; ++t) {
      const Vec z = u.col(t);
      const Mat PN = Mat::Identity(m, m) - D.PT(z);
      const std::vector<Mat> dP = D.dPT(z);
      Mat Q(m, m);
      for (int k = 0; k < m; ++k) Q.col(k) = -(dP[k] * du.col(t));
      for (int k = 0; k < m; ++k) {
        J.block(off + t * m, idx(k, 0), m, 1) = sc * Q.col(k);
        for (int n = 1; n <= N; ++n) {
          const double c = cosT(n, t), s = sinT(n, t);
          J.block(off + t * m, idx(k, n), m, 1) =
              sc * (2.0 * c * Q.col(k) - 2.0 * n * s * PN.col(k));
          J.block(off + t * m, idx(k, N + n), m, 1) =
              sc * (-2.0 * s * Q.col(k) - 2.0 * n * c * PN.col(k));
        }
      }
    }
    if (radius) {
      const double sr = std::sqrt(rho / 2.0);
      const int row = off + m * M;
      for (int k = 0; k < m; ++k) {
        J(row, idx(k, 0)) = sr * 2.0 * x(idx(k, 0));
        for (int n = 1; n <= N; ++n) {
          J(row, idx(k, n)) = sr * 4.0 * x(idx(k, n));
          J(row, idx(k, N + n)) = sr * 4.0 * x(idx(k, N + n));
        }
      }
    }
  }

  Vec pack(const Field& f) const {
    Vec x(full_inputs());
    for (int k = 0; k < m; ++k) {
      x(idx(k, 0)) = f.coef(k, 0).real();
      for (int n = 1; n <= N; ++n) {
        x(idx(k, n)) = f.coef(k, n).real();
        x(idx(k, N + n)) = f.coef(k, n).imag();
      }
    }
    return x;
  }

  Field unpack(const Vec& x) const {
    Field f = Field::vector(m, N);
    for (int k = 0; k < m; ++k) {
      f.set_mode(k, 0, cd(x(idx(k, 0)), 0.0));
      for (int n = 1; n <= N; ++n) f.set_mode(k, n, cd(x(idx(k, n)), x(idx(k, N + n))));
    }
    return f;
  }
};

// Horizontality defect plus the radius gap when that constraint is active.
double violation_of(const ALProblem& pb, const Vec& x) {
  Mat u, du;
  pb.synth(x, u, du);
  return grid_norm(pb.constraint(u, du)) + (pb.radius ? std::abs(pb.radius_gap(x)) : 0.0);
}

// xi = u' + nu, nu normal, from the multiplier field of the horizontality
// constraint.  Exact when the normal projection is constant along u.
Field recover_xi(const Field& u, const ProjectionField& D, const Mat& mu, int Nw) {
  const int M = fft_size(4 * Nw + 1);
  const LoopSamples s = sample_loop(u, D, M, false);
  const int Mmu = static_cast<int>(mu.cols());
  const Field muf = analyze(mu, (Mmu - 1) / 2);
  const Mat target = samples(riesz(u).with_bandwidth(Nw), M) + 0.5 * samples(muf.with_bandwidth(Nw), M);
  const Field psi = analyze(apply_N(s, target), Nw);
  const Mat nu = apply_N(s, samples(lap_pow(psi, 0.5), M));
  return ddtheta(u).with_bandwidth(Nw) + analyze(nu, Nw);
}

}  // namespace

SolveResult solve(const Field& u_init, const ProjectionField& D, const SolveOptions& opts) {
  const int m = u_init.m();
  const int N = std::max(u_init.N(), 1);
  const int M = fft_size(4 * N + 1);
  const bool radius = radius_constraint_active(u_init, D, opts.hh.radius);
  ALProblem pb(D, m, N, M, radius, opts.radius);
  Vec x = pb.pack(u_init.with_bandwidth(N));
  const bool antipodal = antipodal_class_active(u_init.with_bandwidth(N), D, opts.symmetry);
  for (int k = 0; k < m; ++k)
    for (int slot = 0; slot < 2 * N + 1; ++slot) {
      const int n = slot == 0 ? 0 : (slot <= N ? slot : slot - N);
      if (!antipodal || n % 2 == 1) pb.active.push_back(pb.idx(k, slot));
    }

  SolveResult res;
  auto finish = [&](const Vec& xb) {
    const Field u = pb.unpack(xb);
    const int Nw = opts.hh.work_N > 0 ? opts.hh.work_N : 4 * N + 8;
    res.pair = make_pair(u, recover_xi(u, D, pb.mu, Nw), D, opts.hh);
    res.report = el_residuals(res.pair, D, opts.hh);
    res.half_harmonic = half_harmonic_residual(u, D);
    res.violation = violation_of(pb, xb);
    res.energy = half_energy(u);
    res.constant_loop = res.energy <= 1e-10;
    res.converged = res.half_harmonic <= opts.tol && res.violation <= opts.tol && !res.constant_loop;
    res.degenerate = res.violation > opts.degenerate_gate;
    res.stalled = !res.converged;
  };

  double hh0 = half_harmonic_residual(u_init.with_bandwidth(N), D);
  double v0 = violation_of(pb, x);
  res.history.push_back({0, 0.0, pb.energy(x), v0, hh0});
  if (hh0 <= opts.tol && v0 <= opts.tol) {
    finish(x);
    return res;
  }

  // Radial stationarity: grad E . u = 2E and grad g . u = 2R^2.  Starting the
  // radius multiplier here keeps the iterates off the stationary point u = 0.
  if (radius) pb.muR = -pb.energy(x) / (opts.radius * opts.radius);

  Vec best = x;
  double best_score = hh0 + v0;
  int outer = 0;
  for (double rho : opts.penalties) {
    pb.rho = rho;
    for (int it = 0; it < opts.updates_per_penalty; ++it) {
      ++outer;
      Eigen::LevenbergMarquardt<ALProblem, double> lm(pb);
      lm.parameters.maxfev = opts.max_lm_evaluations;
      lm.parameters.xtol = 1e-14;
      lm.parameters.ftol = 1e-14;
      Vec y = pb.restrict(x);
      lm.minimize(y);
      x = pb.expand(y);
      Mat u, du;
      pb.synth(x, u, du);
      const Mat c = pb.constraint(u, du);
      pb.mu += rho * c;
      if (radius) pb.muR += rho * pb.radius_gap(x);
      const double v = grid_norm(c) + (radius ? std::abs(pb.radius_gap(x)) : 0.0);
      const double h = half_harmonic_residual(pb.unpack(x), D);
      res.history.push_back({outer, rho, pb.energy(x), v, h});
      if (h + v < best_score) {
        best_score = h + v;
        best = x;
      }
      if (h <= opts.tol && v <= opts.tol) {
        res.outer_iterations = outer;
        finish(x);
        return res;
      }
    }
  }
  res.outer_iterations = outer;
  finish(best);
  return res;
}

// ------------------------------------------------------------- alignment

namespace {

struct AlignProblem {
  const Field& u;
  int M;
  Eigen::MatrixXcd W;

  AlignProblem(const Field& u_, int M_) : u(u_), M(M_), W(2, M_) {
    for (int t = 0; t < M; ++t) {
      const double th = kTwoPi * t / M;
      W(0, t) = std::polar(1.0 / std::sqrt(2.0), th);
      W(1, t) = std::polar(1.0 / std::sqrt(2.0), -th);
    }
  }

  static cd disc(const Vec& p) { return cd(p(0), p(1)) / std::sqrt(1.0 + p.squaredNorm()); }

  Eigen::MatrixXcd reparam(const Vec& p) const {
    const cd a = disc(p);
    Eigen::MatrixXcd V(2, M);
    for (int t = 0; t < M; ++t) {
      const cd e = std::polar(1.0, kTwoPi * t / M);
      const Vec z = u.eval(std::arg((e - a) / (1.0 - std::conj(a) * e)));
      V(0, t) = cd(z(0), z(1));
      V(1, t) = cd(z(2), z(3));
    }
    return V;
  }

  static Eigen::Matrix2cd procrustes(const Eigen::MatrixXcd& V, const Eigen::MatrixXcd& W) {
    const Eigen::Matrix2cd C = W * V.adjoint();
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
  }

  int inputs() const { return 2; }
  int values() const { return 4 * M; }

  int operator()(const Vec& p, Vec& f) const {
    const Eigen::MatrixXcd V = reparam(p);
    const Eigen::MatrixXcd D = procrustes(V, W) * V - W;
    f.resize(values());
    for (int t = 0; t < M; ++t)
      for (int r = 0; r < 2; ++r) {
        f(4 * t + 2 * r) = D(r, t).real();
        f(4 * t + 2 * r + 1) = D(r, t).imag();
      }
    f *= std::sqrt(kTwoPi / M);
    return 0;
  }

  int df(const Vec& p, Mat& J) const {
    J.resize(values(), 2);
    const double h = 1e-7;
    for (int j = 0; j < 2; ++j) {
      Vec a = p, b = p, fa, fb;
      a(j) += h;
      b(j) -= h;
      (*this)(a, fa);
      (*this)(b, fb);
      J.col(j) = (fa - fb) / (2.0 * h);
    }
    return 0;
  }
};

}  // namespace

Alignment align_to_exhalf(const Field& u) {
  if (u.m() != 4) throw std::invalid_argument("align_to_exhalf expects a loop in R^4");
  AlignProblem pb(u, fft_size(std::max(8 * u.N() + 1, 128)));
  Vec p = Vec::Zero(2);
  Eigen::LevenbergMarquardt<AlignProblem, double> lm(pb);
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-16;
  lm.minimize(p);
  Vec f;
  pb(p, f);
  Alignment a;
  a.distance = f.norm();
  a.mobius_a = AlignProblem::disc(p);
  a.unitary = AlignProblem::procrustes(pb.reparam(p), pb.W);
  return a;
}

// ---------------------------------------------------------- transport

namespace {

// Columns of the frame and their z-derivatives: de[k] holds d e_i / d z_k in
// column i.
struct FrameJet {
  Mat e;
  std::vector<Mat> de;
};

FrameJet frame_jet(const FrameFn& F, const Vec& z) {
  FrameJet j;
  j.e = F(z);
  const double h = 1e-5 * (1.0 + z.norm());
  j.de.resize(z.size());
  for (int k = 0; k < z.size(); ++k) {
    Vec a = z, b = z;
    a(k) += h;
    b(k) -= h;
    j.de[k] = (F(a) - F(b)) / (2.0 * h);
  }
  return j;
}

// A(theta) with w' = A w + E v.
struct TransportCoeffs {
  Mat A;
  Mat E;
};

// Frame field near a point whose frame is e: P_T e (e^T P_T e)^{-1/2}.
FrameFn parallel_extension(const ProjectionField& D, const Mat& e) {
  return [&D, e](const Vec& z) -> Mat {
    const Mat Pe = D.PT(z) * e;
    Eigen::SelfAdjointEigenSolver<Mat> es(e.transpose() * Pe);
    return Pe * es.operatorInverseSqrt();
  };
}

Mat polar_factor(const Mat& A) {
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

TransportCoeffs transport_at(const Field& u, const Field& du, const FrameFn& F, double th) {
  const Vec z = u.eval(th);
  const Vec d = du.eval(th);
  const FrameJet j = frame_jet(F, z);
  const int m = static_cast<int>(z.size());
  const Vec alpha = j.e.transpose() * d;
  TransportCoeffs c;
  c.E = j.e;
  c.A = Mat::Zero(m, m);
  for (int k = 0; k < m; ++k) c.A.col(k) = j.de[k] * alpha;
  return c;
}

}  // namespace

TransportReport variation_transport(const Field& u, const ProjectionField& D,
                                    const Field& controls, const TransportOptions& opts,
                                    const FrameFn& frame) {
  const FrameFn F = frame ? frame : FrameFn([&D](const Vec& z) { return D.frame(z); });
  const int m = u.m();
  const int S = opts.steps;
  const double h = kTwoPi / S;
  const Field du = ddtheta(u);
  const int n = static_cast<int>(F(u.eval(0.0)).cols());
  if (controls.m() != n) throw std::invalid_argument("controls must have one component per frame vector");

  TransportReport rep;
  // Coefficients on the half-step grid.
  std::vector<TransportCoeffs> co(2 * S + 1);
  std::vector<Vec> vv(2 * S + 1);
  std::vector<Mat> frames(2 * S + 1);
  for (int q = 0; q <= 2 * S; ++q) {
    const Mat e = F(u.eval(0.5 * h * q));
    rep.frame_orthonormality = std::max(
        rep.frame_orthonormality, (e.transpose() * e - Mat::Identity(n, n)).cwiseAbs().maxCoeff());
    frames[q] = q == 0 ? e : e * polar_factor(e.transpose() * frames[q - 1]);
  }
  if (rep.frame_orthonormality > opts.frame_tol)
    throw std::invalid_argument("frame is not orthonormal");
  const Mat hol = polar_factor(frames[2 * S].transpose() * frames[0]);
  if (hol.determinant() < 0.0)
    throw std::invalid_argument("frame cannot close up along the loop");
  const Mat gen = hol.log();
  std::vector<FrameFn> local(2 * S + 1);
  for (int q = 0; q <= 2 * S; ++q) {
    const Mat e = frames[q] * (gen * (0.5 * q / S)).exp();
    local[q] = parallel_extension(D, e);
    co[q] = transport_at(u, du, local[q], 0.5 * h * q);
    vv[q] = controls.eval(0.5 * h * q);
  }

  // Correction controls: e_i times 1, cos k theta, sin k theta for k <= K.
  const int K = std::max(3, controls.N());
  const int nb = 2 * K + 1;
  auto basis_fn = [](int b, double th) {
    if (b == 0) return 1.0;
    const int k = (b + 1) / 2;
    return b % 2 ? std::cos(k * th) : std::sin(k * th);
  };
  const int nc = nb * n;
  // Trajectory for initial value w0 and control function ctrl(q).
  auto run = [&](const Vec& w0, const std::function<Vec(int)>& ctrl) {
    Mat traj(m, S + 1);
    Vec w = w0;
    traj.col(0) = w;
    for (int s = 0; s < S; ++s) {
      const int q = 2 * s;
      auto f = [&](int qq, const Vec& x) -> Vec { return co[qq].A * x + co[qq].E * ctrl(qq); };
      const Vec k1 = f(q, w);
      const Vec k2 = f(q + 1, w + 0.5 * h * k1);
      const Vec k3 = f(q + 1, w + 0.5 * h * k2);
      const Vec k4 = f(q + 2, w + h * k3);
      w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      traj.col(s + 1) = w;
    }
    return traj;
  };
  const Vec zero_m = Vec::Zero(m);
  const Vec zero_n = Vec::Zero(n);
  const Mat part = run(zero_m, [&](int q) { return vv[q]; });
  std::vector<Mat> hom(m), cor(nc);
  for (int k = 0; k < m; ++k)
    hom[k] = run(Vec::Unit(m, k), [&](int) { return zero_n; });
  for (int c = 0; c < nc; ++c) {
    const int i = c / nb, b = c % nb;
    cor[c] = run(zero_m, [&, i, b](int q) {
      Vec v = zero_n;
      v(i) = basis_fn(b, 0.5 * h * q);
      return v;
    });
  }
  const bool radius = radius_constraint_active(u, D, opts.hh.radius);
  const int rows = m + (radius ? 1 : 0);
  Mat L(rows, m + nc);
  Vec rhs(rows);
  auto gap = [&](const Mat& tr) -> Vec { return tr.col(S) - tr.col(0); };
  for (int k = 0; k < m; ++k) L.block(0, k, m, 1) = gap(hom[k]);
  for (int c = 0; c < nc; ++c) L.block(0, m + c, m, 1) = gap(cor[c]);
  rhs.head(m) = -gap(part);
  if (radius) {
    L.row(m).setZero();
    L.block(m, 0, 1, m) = u.eval(0.0).transpose();
    rhs(m) = 0.0;
  }
  // Symmetry directions give exactly periodic homogeneous solutions, so L is
  // rank deficient; drop its numerically null directions.
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(L);
  cod.setThreshold(1e-12);
  const Vec sol = cod.solve(rhs);
  Mat traj = part;
  for (int k = 0; k < m; ++k) traj += sol(k) * hom[k];
  for (int c = 0; c < nc; ++c) traj += sol(m + c) * cor[c];
  rep.periodicity = (traj.col(S) - traj.col(0)).norm();

  // Samples at the S nodes.
  Mat W = traj.leftCols(S), dW(m, S), U(m, S), dU(m, S), RU(m, S);
  const Field Ru = riesz(u);
  Vec lc_int = Vec::Zero(m);
  double radial = 0.0;
  for (int s = 0; s < S; ++s) {
    const int q = 2 * s;
    const double th = h * s;
    Vec v = vv[q];
    for (int c = 0; c < nc; ++c) v(c / nb) += sol(m + c) * basis_fn(c % nb, th);
    const Vec z = u.eval(th);
    const Vec d = du.eval(th);
    U.col(s) = z;
    dU.col(s) = d;
    RU.col(s) = Ru.eval(th);
    const FrameJet j = frame_jet(local[q], z);
    const Vec alpha = j.e.transpose() * d;
    const Vec w = W.col(s);
    Mat dwe = Mat::Zero(m, n);
    for (int k = 0; k < m; ++k) dwe += w(k) * j.de[k];
    dW.col(s) = j.e * v + dwe * alpha;

    const Mat P = D.PT(z);
    const Mat PN = Mat::Identity(m, m) - P;
    const Mat dP = D.dPT_along(z, w);
    const Vec dPdu = dP * d;
    rep.control_fit = std::max(rep.control_fit, (d - j.e * alpha).norm());
    rep.tangent_block = std::max(rep.tangent_block, (P * dP * P).norm());
    rep.tangent_drift = std::max(rep.tangent_drift, (P * dPdu).norm());
    const Mat gram = dwe.transpose() * j.e;  // (i, j) = <d_w e_i, e_j>
    const Vec e_form = j.e * (gram * alpha) + dwe * alpha;
    rep.frame_form = std::max(rep.frame_form, (dPdu - e_form).norm());
    rep.normal_frame = std::max(rep.normal_frame, (dPdu - PN * dwe * alpha).norm());
    rep.normal_constraint = std::max(rep.normal_constraint, (dPdu - PN * dW.col(s)).norm());
    const Vec lc = PN * dW.col(s) - dPdu;
    lc_int += lc;
    radial += z.dot(w);
  }
  rep.linearized_constraint = (h * lc_int).norm();
  rep.radial = std::abs(h * radial);
  double pair = 0.0;
  for (int s = 0; s < S; ++s) pair += dW.col(s).dot(RU.col(s));
  rep.pairing = h * pair;
  const double denom = std::sqrt(h) * dW.norm() * std::sqrt(h) * RU.norm();
  rep.pairing_relative = denom > 0.0 ? std::abs(rep.pairing) / denom : 0.0;
  const int Nw = std::min((S - 1) / 2, opts.hh.work_N > 0 ? opts.hh.work_N : 4 * std::max(u.N(), controls.N()) + 8);
  rep.w = analyze(W, Nw);
  return rep;
}

}  // namespace hh
