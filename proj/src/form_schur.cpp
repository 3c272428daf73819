#include "certiloc/form_schur.hpp"

#include <Eigen/Eigenvalues>

#include "certiloc/error.hpp"

namespace certiloc {

StackedVariableLayout StackedVariableLayout::build(const ObservationGraph& graph) {
  StackedVariableLayout layout;
  layout.N = graph.robot_count();
  layout.vec_len = 9 * layout.N * layout.N;
  layout.y_index = layout.vec_len;
  layout.dist_offset = layout.vec_len + 1;
  int col = layout.dist_offset;
  for (const auto& e : graph.edges) {
    std::vector<int> cols;
    cols.reserve(e.measurements.size());
    for (std::size_t i = 0; i < e.measurements.size(); ++i) cols.push_back(col++);
    layout.dist_columns.push_back(std::move(cols));
  }
  return layout;
}

int StackedVariableLayout::dim() const { return dist_offset + distance_count(); }

int StackedVariableLayout::distance_count() const {
  int n = 0;
  for (const auto& cols : dist_columns) n += static_cast<int>(cols.size());
  return n;
}

int StackedVariableLayout::distance_column(const ObservationGraph& graph, int edge,
                                           double t) const {
  const auto& meas = graph.edges.at(static_cast<std::size_t>(edge)).measurements;
  for (std::size_t i = 0; i < meas.size(); ++i) {
    if (meas[i].t == t) return dist_columns.at(static_cast<std::size_t>(edge)).at(i);
  }
  throw DataError("distance_column: timestamp not found on edge");
}

MatX linear_error_row(const ObservationGraph& graph, const PairIndex& pair,
                      const StackedVariableLayout& layout) {
  const auto& edge = graph.edges.at(static_cast<std::size_t>(pair.edge));
  const int N = layout.N;

  auto bearing_at = [&](double t) -> const Vec3& {
    for (const auto& m : edge.measurements) {
      if (m.t == t) return m.b;
    }
    throw DataError("pair timestamp missing from edge measurements");
  };
  const OdometrySample* obs1 = graph.odometry_at(edge.observer, pair.j1);
  const OdometrySample* obs2 = graph.odometry_at(edge.observer, pair.j2);
  const OdometrySample* tgt1 = graph.odometry_at(edge.observed, pair.j1);
  const OdometrySample* tgt2 = graph.odometry_at(edge.observed, pair.j2);
  if (!obs1 || !obs2 || !tgt1 || !tgt2) {
    throw DataError("pair timestamps missing from odometry");
  }
  const Vec3 g1 = obs1->R * bearing_at(pair.j1);
  const Vec3 g2 = obs2->R * bearing_at(pair.j2);
  const Vec3 t_obs = obs2->p - obs1->p;
  const Vec3 t_tgt = tgt2->p - tgt1->p;

  MatX M = MatX::Zero(3, layout.dim());

  // e = g2*d2 - g1*d1 + t_obs*y - Z_{obs,tgt} * t_tgt, so the vec(Z) block is
  // -(C_tgt t_tgt)^T (x) C_obs^T: entry Z(3(obs-1)+i, 3(tgt-1)+q) carries
  // coefficient -t_tgt[q] in error component i (column-major vec index).
  const int ro = 3 * (edge.observer - 1);
  const int rt = 3 * (edge.observed - 1);
  for (int i = 0; i < 3; ++i) {
    for (int q = 0; q < 3; ++q) {
      M(i, (rt + q) * 3 * N + (ro + i)) = -t_tgt[q];
    }
  }
  M.col(layout.y_index) = t_obs;
  M.col(layout.distance_column(graph, pair.edge, pair.j1)) = -g1;
  M.col(layout.distance_column(graph, pair.edge, pair.j2)) = g2;
  return M;
}

MatX build_Q(const ObservationGraph& graph, const std::vector<PairIndex>& pairs,
             const StackedVariableLayout& layout) {
  MatX Q = MatX::Zero(layout.dim(), layout.dim());
  for (const auto& pair : pairs) {
    const MatX M = linear_error_row(graph, pair, layout);
    Q.selfadjointView<Eigen::Lower>().rankUpdate(M.transpose());
  }
  Q.triangularView<Eigen::StrictlyUpper>() = Q.transpose();
  return Q;
}

namespace {

// Pseudoinverse application via eigendecomposition with relative cutoff.
MatX apply_pinv(const Eigen::SelfAdjointEigenSolver<MatX>& eig, const MatX& rhs,
                double cutoff_rel) {
  const VecX& ev = eig.eigenvalues();
  const double lam_max = ev.size() > 0 ? ev.cwiseAbs().maxCoeff() : 0.0;
  const double cut = cutoff_rel * lam_max;
  VecX inv = VecX::Zero(ev.size());
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] > cut) inv[i] = 1.0 / ev[i];
  }
  return eig.eigenvectors() * inv.asDiagonal() * (eig.eigenvectors().transpose() * rhs);
}

}  // namespace

MarginalizedForm marginalize_distances(const MatX& Q, const StackedVariableLayout& layout,
                                       double eig_cutoff_rel) {
  const int nz = layout.dist_offset;  // 9N^2 + 1
  const int nd = layout.distance_count();
  if (Q.rows() != nz + nd || Q.cols() != nz + nd) {
    throw std::invalid_argument("marginalize_distances: Q/layout dimension mismatch");
  }

  MarginalizedForm out;
  if (nd == 0) {
    out.Qbar = Q;
  } else {
    const MatX Qzz = Q.topLeftCorner(nz, nz);
    const MatX Qzd = Q.topRightCorner(nz, nd);
    const MatX Qdd = Q.bottomRightCorner(nd, nd);
    Eigen::SelfAdjointEigenSolver<MatX> eig(Qdd);
    out.Qbar = Qzz - Qzd * apply_pinv(eig, Qzd.transpose(), eig_cutoff_rel);
    out.Qbar = 0.5 * (out.Qbar + out.Qbar.transpose());
  }

  const int v = layout.vec_len;
  out.U = out.Qbar.topLeftCorner(v, v);
  out.V = 2.0 * unvec(out.Qbar.block(0, v, v, 1), 3 * layout.N, 3 * layout.N);
  out.W = out.Qbar(v, v);
  return out;
}

QuadraticForm build_schur(const ObservationGraph& graph, const std::vector<PairIndex>& pairs) {
  const auto layout = StackedVariableLayout::build(graph);
  const MatX Q = build_Q(graph, pairs, layout);
  const MarginalizedForm marg = marginalize_distances(Q, layout);

  QuadraticForm form = QuadraticForm::empty(graph.robot_count());
  form.quad_dense = marg.U;
  form.linear = marg.V;
  form.constant = marg.W;
  return form;
}

VecX recover_distances_from_schur(const MatX& Q, const StackedVariableLayout& layout,
                                  const VecX& z, double eig_cutoff_rel) {
  const int nz = layout.dist_offset;
  const int nd = layout.distance_count();
  if (z.size() != nz) {
    throw std::invalid_argument("recover_distances_from_schur: z dimension mismatch");
  }
  if (nd == 0) return VecX::Zero(0);
  const MatX Qdd = Q.bottomRightCorner(nd, nd);
  const MatX Qdz = Q.bottomLeftCorner(nd, nz);
  Eigen::SelfAdjointEigenSolver<MatX> eig(Qdd);
  return -apply_pinv(eig, MatX(Qdz * z), eig_cutoff_rel);
}

}  // namespace certiloc
