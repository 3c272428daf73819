#include "certiloc/form_cross.hpp"

#include <Eigen/Dense>

#include "certiloc/error.hpp"

namespace certiloc {

Vec3 cross_kernel(const Vec3& g1, const Vec3& g2) { return g1.cross(g2); }

MatX PairTerm::A() const {
  MatX a = MatX::Zero(3 * N, 3 * N);
  a.block<3, 3>(3 * (observed - 1), 3 * (observed - 1)) = t_tgt * t_tgt.transpose();
  return a;
}

MatX PairTerm::B() const {
  MatX b = MatX::Zero(3 * N, 3 * N);
  b.block<3, 3>(3 * (observer - 1), 3 * (observer - 1)) = kernel * kernel.transpose();
  return b;
}

MatX PairTerm::Cm() const {
  MatX c = MatX::Zero(3 * N, 3 * N);
  const double kt = kernel.dot(t_obs);
  c.block<3, 3>(3 * (observed - 1), 3 * (observer - 1)) =
      -2.0 * kt * (t_tgt * kernel.transpose());
  return c;
}

double PairTerm::D() const {
  const double kt = kernel.dot(t_obs);
  return kt * kt;
}

std::optional<PairTerm> pair_term(const ObservationGraph& graph, const PairIndex& pair,
                                  double kappa_min) {
  const auto& edge = graph.edges.at(static_cast<std::size_t>(pair.edge));

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

  // Bearings rotated by the observer odometry at their own timestamps.
  const Vec3 g1 = obs1->R * bearing_at(pair.j1);
  const Vec3 g2 = obs2->R * bearing_at(pair.j2);
  const Vec3 k = cross_kernel(g1, g2);
  if (k.norm() < kappa_min) return std::nullopt;

  PairTerm term;
  term.N = graph.robot_count();
  term.observer = edge.observer;
  term.observed = edge.observed;
  term.kernel = k;
  term.t_obs = obs2->p - obs1->p;
  term.t_tgt = tgt2->p - tgt1->p;
  return term;
}

QuadraticForm build_cross(const ObservationGraph& graph, const std::vector<PairIndex>& pairs,
                          double kappa_min) {
  QuadraticForm form = QuadraticForm::empty(graph.robot_count());
  for (const auto& pair : pairs) {
    const auto term = pair_term(graph, pair, kappa_min);
    if (!term) continue;
    form.terms.push_back(term->quad());
    const double kt = term->kernel.dot(term->t_obs);
    form.linear.block<3, 3>(3 * (term->observed - 1), 3 * (term->observer - 1)) +=
        -2.0 * kt * (term->t_tgt * term->kernel.transpose());
    form.constant += kt * kt;
  }
  if (form.terms.empty()) {
    throw SolverError("build_cross: all pairs degenerate (parallel bearings)");
  }
  return form;
}

}  // namespace certiloc
