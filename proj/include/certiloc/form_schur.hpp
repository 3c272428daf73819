#pragma once

#include <vector>

#include "certiloc/graph.hpp"
#include "certiloc/quadratic_form.hpp"

namespace certiloc {

// Index layout of the stacked variable x = [vec(R^T R)^T, y, d^T]^T. One
// distance variable per (edge, measurement) in edge order, measurements in
// time order.
struct StackedVariableLayout {
  int N = 0;
  int vec_len = 0;                             // 9 N^2
  int y_index = 0;                             // = vec_len
  int dist_offset = 0;                         // = vec_len + 1
  std::vector<std::vector<int>> dist_columns;  // [edge][meas position] -> column

  static StackedVariableLayout build(const ObservationGraph& graph);

  int dim() const;
  int distance_count() const;
  // Column of the distance variable for (edge, timestamp); throws DataError
  // when the timestamp is not a measurement of that edge.
  int distance_column(const ObservationGraph& graph, int edge, double t) const;
};

// Marginalized quadratic Q-bar over z = [vec(Z)^T, y]^T plus the extracted
// unified coefficients.
struct MarginalizedForm {
  MatX Qbar;   // (9N^2+1) x (9N^2+1)
  MatX U;      // 9N^2 x 9N^2 leading principal block
  MatX V;      // 3N x 3N
  double W = 0.0;
};

// One 3 x dim(x) row block M with e = M x equal to the linear-form error of
// the pair.
MatX linear_error_row(const ObservationGraph& graph, const PairIndex& pair,
                      const StackedVariableLayout& layout);

// Q = sum over pairs of M^T M.
MatX build_Q(const ObservationGraph& graph, const std::vector<PairIndex>& pairs,
             const StackedVariableLayout& layout);

// Eliminates the distance block by the generalized Schur complement
// Q/Q_DD with an eigenvalue-cutoff pseudoinverse.
MarginalizedForm marginalize_distances(const MatX& Q, const StackedVariableLayout& layout,
                                       double eig_cutoff_rel = 1e-10);

// Full pipeline: layout + Q + marginalization wrapped into the shared
// QuadraticForm (dense quadratic representation).
QuadraticForm build_schur(const ObservationGraph& graph, const std::vector<PairIndex>& pairs);

// Minimizing distances for fixed z = [vec(Z)^T, 1]^T:
// d* = -Q_DD^+ Q_{D,Dbar} z.
VecX recover_distances_from_schur(const MatX& Q, const StackedVariableLayout& layout,
                                  const VecX& z, double eig_cutoff_rel = 1e-10);

}  // namespace certiloc
