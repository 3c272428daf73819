#pragma once

#include <optional>
#include <vector>

#include "certiloc/graph.hpp"
#include "certiloc/quadratic_form.hpp"

namespace certiloc {

// k = g1 x g2, the kernel direction orthogonal to both rotated bearings.
Vec3 cross_kernel(const Vec3& g1, const Vec3& g2);

// Coefficients of one squared pair error
//   e = k^T (Z_{obs,tgt} t_tgt - t_obs),  e^2 = tr(A Z B Z) + tr(Cm Z) + D.
// Kept in factored form; A()/B()/Cm() materialize the 3N x 3N blocks.
struct PairTerm {
  int N = 0;
  int observer = 0;
  int observed = 0;
  Vec3 kernel = Vec3::Zero();  // k
  Vec3 t_obs = Vec3::Zero();   // observer odometry baseline t_{X_{j1 j2}}
  Vec3 t_tgt = Vec3::Zero();   // observed odometry baseline t_{Y_{j1 j2}}

  MatX A() const;
  MatX B() const;
  MatX Cm() const;
  double D() const;

  QuadTerm quad() const { return {observer, observed, kernel, t_tgt}; }
};

inline constexpr double kKernelMinNorm = 1e-8;

// Builds the term for one pair; nullopt when the two rotated bearings are
// parallel (||k|| < kappa_min) and the pair carries no rotation information.
std::optional<PairTerm> pair_term(const ObservationGraph& graph, const PairIndex& pair,
                                  double kappa_min = kKernelMinNorm);

// Sums all non-degenerate pair terms into the unified objective. Throws
// SolverError when every pair is degenerate.
QuadraticForm build_cross(const ObservationGraph& graph, const std::vector<PairIndex>& pairs,
                          double kappa_min = kKernelMinNorm);

}  // namespace certiloc
