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

#include "distributions.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hh {

void ProjectionField::check_point(const Vec& z) const {
  if (z.size() != m()) throw std::invalid_argument(name() + ": point has wrong dimension");
}

std::vector<Mat> ProjectionField::dPT(const Vec& z) const {
  check_point(z);
  return mode_ == Mode::Analytic ? dPT_analytic(z) : dPT_fd(z);
}

std::vector<Mat> ProjectionField::dPT_analytic(const Vec& z) const { return dPT_fd(z); }

std::vector<Mat> ProjectionField::dPT_fd(const Vec& z, double h) const {
  if (h <= 0.0) h = 1e-5 * (1.0 + z.norm());
  std::vector<Mat> d(m());
  for (int k = 0; k < m(); ++k) {
    Vec zp = z, zm = z;
    zp(k) += h;
    zm(k) -= h;
    d[k] = (PT(zp) - PT(zm)) / (2.0 * h);
  }
  return d;
}

Mat ProjectionField::dPT_along(const Vec& z, const Vec& w) const {
  const auto d = dPT(z);
  Mat s = Mat::Zero(m(), m());
  for (int k = 0; k < m(); ++k) s += w(k) * d[k];
  return s;
}

Mat ProjectionField::frame(const Vec& z) const {
  const Mat P = PT(z);
  Mat E(m(), rank());
  int found = 0;
  for (int k = 0; k < m() && found < rank(); ++k) {
    Vec v = P.col(k);
    for (int j = 0; j < found; ++j) v -= E.col(j).dot(v) * E.col(j);
    if (v.norm() > 1e-3) E.col(found++) = v.normalized();
  }
  if (found < rank()) throw std::runtime_error(name() + ": frame construction failed");
  return E;
}

Mat complex_structure(int m) {
  if (m % 2) throw std::invalid_argument("complex structure needs even dimension");
  Mat J = Mat::Zero(m, m);
  for (int k = 0; k < m / 2; ++k) {
    J(2 * k, 2 * k + 1) = -1.0;
    J(2 * k + 1, 2 * k) = 1.0;
  }
  return J;
}

namespace {

class ConstantField final : public ProjectionField {
 public:
  explicit ConstantField(Mat P) : P_(std::move(P)) {
    rank_ = static_cast<int>(std::lround(P_.trace()));
  }
  std::string name() const override { return "constant"; }
  int m() const override { return static_cast<int>(P_.rows()); }
  int rank() const override { return rank_; }
  Mat PT(const Vec&) const override { return P_; }

 protected:
  std::vector<Mat> dPT_analytic(const Vec&) const override {
    return std::vector<Mat>(m(), Mat::Zero(m(), m()));
  }

 private:
  Mat P_;
  int rank_;
};

// d/dz_k of a a^T / |a|^2 given a and da = d a / d z_k.
Mat d_rank_one(const Vec& a, const Vec& da) {
  const double n2 = a.squaredNorm();
  return (da * a.transpose() + a * da.transpose()) / n2 -
         2.0 * a.dot(da) * a * a.transpose() / (n2 * n2);
}

class SphereTangent final : public ProjectionField {
 public:
  explicit SphereTangent(int m) : m_(m) {}
  std::string name() const override { return "sphere_tangent"; }
  int m() const override { return m_; }
  int rank() const override { return m_ - 1; }
  void check_point(const Vec& z) const override {
    ProjectionField::check_point(z);
    if (z.norm() == 0.0) throw std::domain_error("sphere_tangent: singular at z = 0");
  }
  Mat PT(const Vec& z) const override {
    check_point(z);
    return Mat::Identity(m_, m_) - z * z.transpose() / z.squaredNorm();
  }

 protected:
  std::vector<Mat> dPT_analytic(const Vec& z) const override {
    std::vector<Mat> d(m_);
    for (int k = 0; k < m_; ++k) d[k] = -d_rank_one(z, Vec::Unit(m_, k));
    return d;
  }

 private:
  int m_;
};

class Hopf final : public ProjectionField {
 public:
  explicit Hopf(int k) : k_(k), J_(complex_structure(2 * k)) {}
  std::string name() const override { return "hopf_C" + std::to_string(k_); }
  int m() const override { return 2 * k_; }
  int rank() const override { return 2 * k_ - 2; }
  void check_point(const Vec& z) const override {
    ProjectionField::check_point(z);
    if (z.norm() == 0.0) throw std::domain_error(name() + ": singular at z = 0");
  }
  Mat PT(const Vec& z) const override {
    check_point(z);
    const Vec w = J_ * z;
    return Mat::Identity(m(), m()) -
           (z * z.transpose() + w * w.transpose()) / z.squaredNorm();
  }
  Mat frame(const Vec& z) const override {
    if (k_ != 2) return ProjectionField::frame(z);
    check_point(z);
    Mat E(4, 2);
    E.col(0) << -z(2), z(3), z(0), -z(1);
    E.col(0) /= z.norm();
    E.col(1) = J_ * E.col(0);
    return E;
  }

 protected:
  std::vector<Mat> dPT_analytic(const Vec& z) const override {
    std::vector<Mat> d(m());
    const Vec w = J_ * z;
    for (int k = 0; k < m(); ++k) {
      const Vec e = Vec::Unit(m(), k);
      d[k] = -d_rank_one(z, e) - d_rank_one(w, J_ * e);
    }
    return d;
  }

 private:
  int k_;
  Mat J_;
};

// Kernel of dt - (x dy - y dx)/2 in R^3 = (x, y, t).
class Heisenberg final : public ProjectionField {
 public:
  std::string name() const override { return "heisenberg"; }
  int m() const override { return 3; }
  int rank() const override { return 2; }
  Mat PT(const Vec& z) const override {
    check_point(z);
    const Vec a = normal(z);
    return Mat::Identity(3, 3) - a * a.transpose() / a.squaredNorm();
  }
  Mat frame(const Vec& z) const override {
    const Vec a = normal(z);
    Mat E(3, 2);
    E.col(0) << 1.0, 0.0, -0.5 * z(1);
    E.col(0).normalize();
    const Eigen::Vector3d a3 = a, e0 = E.col(0);
    E.col(1) = a3.cross(e0).normalized();
    return E;
  }

 protected:
  std::vector<Mat> dPT_analytic(const Vec& z) const override {
    const Vec a = normal(z);
    std::vector<Mat> d(3);
    const Vec dx = Eigen::Vector3d(0.0, -0.5, 0.0), dy = Eigen::Vector3d(0.5, 0.0, 0.0);
    d[0] = -d_rank_one(a, dx);
    d[1] = -d_rank_one(a, dy);
    d[2] = Mat::Zero(3, 3);
    return d;
  }

 private:
  static Vec normal(const Vec& z) {
    return Eigen::Vector3d(0.5 * z(1), -0.5 * z(0), 1.0);
  }
};

class PolynomialField final : public ProjectionField {
 public:
  struct Term {
    int i, j;
    double coeff;
    std::vector<int> powers;
  };
  PolynomialField(int m, int rank, std::vector<Term> terms)
      : m_(m), rank_(rank), terms_(std::move(terms)) {}
  std::string name() const override { return "polynomial"; }
  int m() const override { return m_; }
  int rank() const override { return rank_; }
  Mat PT(const Vec& z) const override {
    check_point(z);
    Mat P = Mat::Zero(m_, m_);
    for (const auto& t : terms_) add(P, t, monomial(t, z, -1));
    return P;
  }

 protected:
  std::vector<Mat> dPT_analytic(const Vec& z) const override {
    std::vector<Mat> d(m_, Mat::Zero(m_, m_));
    for (int k = 0; k < m_; ++k)
      for (const auto& t : terms_) add(d[k], t, monomial(t, z, k));
    return d;
  }

 private:
  static void add(Mat& P, const Term& t, double v) {
    P(t.i, t.j) += v;
    if (t.i != t.j) P(t.j, t.i) += v;
  }
  // Value of the monomial, or of its derivative along z_k when k >= 0.
  static double monomial(const Term& t, const Vec& z, int k) {
    double v = t.coeff;
    for (int l = 0; l < static_cast<int>(t.powers.size()); ++l) {
      int p = t.powers[l];
      if (l == k) {
        if (p == 0) return 0.0;
        v *= p;
        --p;
      }
      v *= std::pow(z(l), p);
    }
    return v;
  }
  int m_, rank_;
  std::vector<Term> terms_;
};

class FiniteDifferenceView final : public ProjectionField {
 public:
  explicit FiniteDifferenceView(Distribution D) : D_(std::move(D)) {
    set_mode(Mode::FiniteDifference);
  }
  std::string name() const override { return D_->name(); }
  int m() const override { return D_->m(); }
  int rank() const override { return D_->rank(); }
  void check_point(const Vec& z) const override { D_->check_point(z); }
  Mat PT(const Vec& z) const override { return D_->PT(z); }
  Mat frame(const Vec& z) const override { return D_->frame(z); }

 private:
  Distribution D_;
};

}  // namespace

Distribution with_finite_differences(Distribution D) {
  return std::make_shared<FiniteDifferenceView>(std::move(D));
}

Distribution make_constant(const Mat& P0) { return std::make_shared<ConstantField>(P0); }
Distribution make_sphere_tangent(int m) { return std::make_shared<SphereTangent>(m); }
Distribution make_hopf(int k) {
  if (k < 2) throw std::invalid_argument("hopf needs k >= 2");
  return std::make_shared<Hopf>(k);
}
Distribution make_heisenberg() { return std::make_shared<Heisenberg>(); }

Distribution make_polynomial(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  const int m = j.at("m").get<int>();
  std::vector<PolynomialField::Term> terms;
  for (const auto& t : j.at("terms")) {
    PolynomialField::Term term{t.at("i").get<int>(), t.at("j").get<int>(),
                               t.at("coeff").get<double>(),
                               t.value("powers", std::vector<int>(m, 0))};
    if (term.i < 0 || term.j < 0 || term.i >= m || term.j >= m ||
        static_cast<int>(term.powers.size()) != m)
      throw std::invalid_argument("polynomial field: malformed term");
    terms.push_back(std::move(term));
  }
  return std::make_shared<PolynomialField>(m, j.at("rank").get<int>(), std::move(terms));
}

Distribution make_builtin(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (name == "constant") {
    if (arg.empty()) return make_constant(Mat::Identity(2, 2));
    std::vector<double> diag;
    std::stringstream ss(arg);
    for (std::string tok; std::getline(ss, tok, ',');) diag.push_back(std::stod(tok));
    Mat P = Mat::Zero(diag.size(), diag.size());
    for (size_t k = 0; k < diag.size(); ++k) P(k, k) = diag[k];
    return make_constant(P);
  }
  if (name == "sphere_tangent") return make_sphere_tangent(arg.empty() ? 3 : std::stoi(arg));
  if (name == "hopf_C2") return make_hopf(2);
  if (name == "hopf_C3") return make_hopf(3);
  if (name == "heisenberg") return make_heisenberg();
  throw std::invalid_argument("unknown distribution '" + spec +
                              "' (constant, sphere_tangent:<m>, hopf_C2, hopf_C3, heisenberg)");
}

BracketReport bracket_defect(const ProjectionField& D, const Vec& z, const Vec& X,
                             const Vec& Y, double tol) {
  const Mat P = D.PT(z);
  const Vec V = P * X, W = P * Y;
  BracketReport r{z, X, Y, {}, {}, false};
  r.bracket = D.dPT_along(z, V) * Y - D.dPT_along(z, W) * X;
  r.defect = D.PN(z) * r.bracket;
  r.integrable = r.defect.norm() <= tol;
  return r;
}

Vec symmetric_derivative_defect(const ProjectionField& D, const Vec& z, const Vec& X, const Vec& Y) {
  const Mat P = D.PT(z);
  const Vec V = P * X, W = P * Y;
  return D.dPT_along(z, V) * W - D.dPT_along(z, W) * V;
}

ProjectionInvariants check_invariants(const ProjectionField& D, const Vec& z, const Vec& U,
                                      const Vec& V) {
  const Mat P = D.PT(z);
  const Mat N = Mat::Identity(D.m(), D.m()) - P;
  return {(P - P.transpose()).norm(), (P * P - P).norm(), std::abs(P.trace() - D.rank()),
          std::abs((P * U).dot(N * V))};
}

}  // namespace hh
