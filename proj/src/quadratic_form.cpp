#include "certiloc/quadratic_form.hpp"

#include <Eigen/Dense>

#include <stdexcept>

#include "certiloc/error.hpp"

namespace certiloc {

MatX QuadTerm::A(int N) const {
  MatX a = MatX::Zero(3 * N, 3 * N);
  a.block<3, 3>(3 * (tgt - 1), 3 * (tgt - 1)) = t * t.transpose();
  return a;
}

MatX QuadTerm::B(int N) const {
  MatX b = MatX::Zero(3 * N, 3 * N);
  b.block<3, 3>(3 * (obs - 1), 3 * (obs - 1)) = k * k.transpose();
  return b;
}

QuadraticForm QuadraticForm::empty(int N) {
  QuadraticForm f;
  f.N = N;
  f.linear = MatX::Zero(3 * N, 3 * N);
  f.constant = 0.0;
  return f;
}

double QuadraticForm::quad_value(const MatX& Z) const {
  if (Z.rows() != dim() || Z.cols() != dim()) {
    throw std::invalid_argument("QuadraticForm: Z dimension mismatch");
  }
  double q = 0.0;
  if (!terms.empty()) {
    for (const auto& term : terms) {
      const double s =
          term.t.dot(Z.block<3, 3>(3 * (term.tgt - 1), 3 * (term.obs - 1)) * term.k);
      q += s * s;
    }
  } else if (quad_dense) {
    const VecX z = vec(Z);
    q = z.dot(*quad_dense * z);
  }
  return q;
}

double QuadraticForm::evaluate(const MatX& Z) const {
  // tr(linear * Z) without forming the product.
  const double lin = linear.transpose().cwiseProduct(Z).sum();
  return quad_value(Z) + lin + constant;
}

MatX QuadraticForm::gradient(const MatX& Z) const {
  if (Z.rows() != dim() || Z.cols() != dim()) {
    throw std::invalid_argument("QuadraticForm: Z dimension mismatch");
  }
  MatX G = 0.5 * (linear + linear.transpose());
  if (!terms.empty()) {
    for (const auto& term : terms) {
      const int rt = 3 * (term.tgt - 1);
      const int ro = 3 * (term.obs - 1);
      const double s = term.t.dot(Z.block<3, 3>(rt, ro) * term.k);
      // A Z B + B Z A  =  s * (t k^T at (tgt,obs)  +  k t^T at (obs,tgt))
      G.block<3, 3>(rt, ro) += s * (term.t * term.k.transpose());
      G.block<3, 3>(ro, rt) += s * (term.k * term.t.transpose());
    }
  } else if (quad_dense) {
    const VecX g = (*quad_dense + quad_dense->transpose()) * vec(Z);
    const MatX Gq = unvec(g, dim(), dim());
    G += 0.5 * (Gq + Gq.transpose());
  }
  return G;
}

MatX QuadraticForm::dense_hessian() const {
  if (quad_dense) return *quad_dense;
  const int d2 = 9 * N * N;
  if (d2 > 4096) {
    throw SolverError("dense_hessian: refusing to materialize H beyond desk scale");
  }
  MatX H = MatX::Zero(d2, d2);
  for (const auto& term : terms) {
    const MatX A = term.A(N);
    const MatX B = term.B(N);
    // H += B (x) A
    for (int bc = 0; bc < 3 * N; ++bc) {
      for (int br = 0; br < 3 * N; ++br) {
        const double w = B(br, bc);
        if (w == 0.0) continue;
        H.block(3 * N * br, 3 * N * bc, 3 * N, 3 * N) += w * A;
      }
    }
  }
  return H;
}

double QuadraticForm::scale() const {
  double tr_h = 0.0;
  for (const auto& term : terms) {
    tr_h += term.t.squaredNorm() * term.k.squaredNorm();
  }
  if (quad_dense) tr_h += quad_dense->trace();
  return tr_h + linear.norm() + std::abs(constant) + 1.0;
}

MatX choose_matrix(int N, int X) {
  MatX C = MatX::Zero(3 * N, 3);
  C.block<3, 3>(3 * (X - 1), 0) = Mat3::Identity();
  return C;
}

MatX gram_from_rotations(const std::vector<Mat3>& rotations) {
  const int N = static_cast<int>(rotations.size());
  MatX R(3, 3 * N);
  for (int i = 0; i < N; ++i) R.block<3, 3>(0, 3 * i) = rotations[static_cast<std::size_t>(i)];
  return R.transpose() * R;
}

VecX vec(const MatX& M) {
  return Eigen::Map<const VecX>(M.data(), M.size());
}

MatX unvec(const VecX& v, int rows, int cols) {
  return Eigen::Map<const MatX>(v.data(), rows, cols);
}

}  // namespace certiloc
