#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "certiloc/so3.hpp"

namespace certiloc {

using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

// One Kronecker-factor pair of the quadratic part, kept in rank-one form:
//   A_k = C_tgt * t * t^T * C_tgt^T,   B_k = C_obs * k * k^T * C_obs^T,
// contributing tr(A_k Z B_k Z) = (t^T Z_{tgt,obs} k)^2.
struct QuadTerm {
  int obs = 1;  // observer block index, 1-based
  int tgt = 1;  // observed block index, 1-based
  Vec3 k = Vec3::Zero();
  Vec3 t = Vec3::Zero();

  MatX A(int N) const;  // dense 3N x 3N, for checks at small N
  MatX B(int N) const;
};

// Unified objective over the Gram matrix Z (3N x 3N):
//   f(Z) = sum_k tr(A_k Z B_k Z) + tr(linear * Z) + constant
// with the quadratic part held either as structured terms (canonical) or as a
// dense 9N^2 x 9N^2 matrix acting on vec(Z) (marginalized formulation; only
// used at desk scale). Exactly one of the two is populated.
struct QuadraticForm {
  int N = 0;
  std::vector<QuadTerm> terms;
  std::optional<MatX> quad_dense;
  MatX linear;  // 3N x 3N, not necessarily symmetric
  double constant = 0.0;

  static QuadraticForm empty(int N);

  int dim() const { return 3 * N; }

  double evaluate(const MatX& Z) const;

  // Quadratic part only (the vec(Z)^T H vec(Z) piece).
  double quad_value(const MatX& Z) const;

  // Symmetric G with evaluate(Z + dZ) - evaluate(Z) ~= <G, dZ>_F for
  // symmetric dZ.
  MatX gradient(const MatX& Z) const;

  // Materialized H = sum_k B_k (x) A_k (or the stored dense matrix). Guarded
  // against large N; intended for cross checks.
  MatX dense_hessian() const;

  // Rough magnitude of the objective, used to scale tolerances:
  // tr(H) + ||linear||_F + |constant| + 1.
  double scale() const;
};

// The 3N x 3 selector C_X = e_X (x) I_3.
MatX choose_matrix(int N, int X);

// Gram matrix of a stacked rotation set: Z = R^T R with R = [R_1 ... R_N].
MatX gram_from_rotations(const std::vector<Mat3>& rotations);

// vec / vec^-1 in column-major order, matching the Kronecker identities used
// throughout.
VecX vec(const MatX& M);
MatX unvec(const VecX& v, int rows, int cols);

}  // namespace certiloc
