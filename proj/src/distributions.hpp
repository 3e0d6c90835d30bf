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

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hh {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// A plane distribution z -> P_T(z), a field of rank-n orthogonal projections
// on R^m.  dPT(z)[k] is the partial derivative of P_T along z_k.
class ProjectionField {
 public:
  enum class Mode { Analytic, FiniteDifference };

  virtual ~ProjectionField() = default;

  virtual std::string name() const = 0;
  virtual int m() const = 0;
  virtual int rank() const = 0;
  virtual Mat PT(const Vec& z) const = 0;
  // Throws std::domain_error on the singular locus.
  virtual void check_point(const Vec& z) const;

  Mat PN(const Vec& z) const { return Mat::Identity(m(), m()) - PT(z); }
  std::vector<Mat> dPT(const Vec& z) const;
  std::vector<Mat> dPT_fd(const Vec& z, double h = -1.0) const;
  // Directional derivative sum_k w_k dPT[k].
  Mat dPT_along(const Vec& z, const Vec& w) const;
  // Orthonormal basis of the horizontal plane, one vector per column.
  virtual Mat frame(const Vec& z) const;

  Mode mode() const { return mode_; }
  void set_mode(Mode m) { mode_ = m; }

 protected:
  virtual std::vector<Mat> dPT_analytic(const Vec& z) const;

 private:
  Mode mode_ = Mode::Analytic;
};

using Distribution = std::shared_ptr<const ProjectionField>;

Distribution make_constant(const Mat& P0);
Distribution make_sphere_tangent(int m);
Distribution make_hopf(int k);  // hopf_C2 (k = 2) and hopf_C3 (k = 3)
Distribution make_heisenberg();
// Polynomial entries: JSON {"m", "rank", "terms": [{"i", "j", "coeff",
// "powers": [...]}]}; entries (i, j) and (j, i) are filled together.
Distribution make_polynomial(const std::string& json_text);
// Names: constant (identity), constant:<diag entries comma separated>,
// sphere_tangent:<m>, hopf_C2, hopf_C3, heisenberg.
Distribution make_builtin(const std::string& spec);
// Same field with derivatives by central differences.
Distribution with_finite_differences(Distribution D);

// Complex structure i(x1, y1, ...) = (-y1, x1, ...).
Mat complex_structure(int m);

struct BracketReport {
  Vec z, X, Y;
  Vec bracket;
  Vec defect;
  bool integrable = false;
};

BracketReport bracket_defect(const ProjectionField& D, const Vec& z, const Vec& X,
                             const Vec& Y, double tol = 1e-10);
Vec symmetric_derivative_defect(const ProjectionField& D, const Vec& z, const Vec& X, const Vec& Y);

struct ProjectionInvariants {
  double symmetry = 0.0;
  double idempotence = 0.0;
  double trace = 0.0;
  double orthogonality = 0.0;
};
ProjectionInvariants check_invariants(const ProjectionField& D, const Vec& z,
                                      const Vec& U, const Vec& V);

}  // namespace hh
