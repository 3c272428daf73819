#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "certiloc/form_schur.hpp"
#include "certiloc/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace certiloc;

namespace {

// Stacked ground-truth variable x = [vec(Z~), 1, d~].
VecX truth_x(const Generated& gen, const StackedVariableLayout& layout) {
  VecX x = VecX::Zero(layout.dim());
  const MatX Zt = ground_truth_gram(gen.truth.poses);
  x.head(layout.vec_len) = vec(Zt);
  x[layout.y_index] = 1.0;
  for (std::size_t e = 0; e < gen.truth.distances.size(); ++e) {
    const auto& cols = layout.dist_columns[e];
    for (std::size_t i = 0; i < cols.size(); ++i) {
      x[cols[i]] = gen.truth.distances[e][i];
    }
  }
  return x;
}

}  // namespace

TEST_SUITE("form_schur") {

TEST_CASE("linear error row annihilates the ground-truth stacked variable") {
  const auto gen = testutil::instance(3, 101);
  const auto layout = StackedVariableLayout::build(gen.graph);
  const VecX x = truth_x(gen, layout);
  for (const auto& pair : enumerate_pairs(gen.graph)) {
    const MatX M = linear_error_row(gen.graph, pair, layout);
    CHECK((M * x).norm() < 1e-9);
  }
}

TEST_CASE("static observed robot zeroes the vec(Z) block") {
  auto gen = testutil::tiny(19);
  // Freeze the observed robot of edge 0 at its first pose.
  const int observed = gen.graph.edges[0].observed;
  auto& odom = gen.graph.robots[static_cast<std::size_t>(observed - 1)].odometry;
  for (auto& s : odom) {
    s.R = odom[0].R;
    s.p = odom[0].p;
  }
  const auto layout = StackedVariableLayout::build(gen.graph);
  const PairIndex pair{0, odom[0].t, odom[1].t};
  const MatX M = linear_error_row(gen.graph, pair, layout);
  CHECK(M.leftCols(layout.vec_len).norm() == 0.0);
  CHECK(M.col(layout.y_index).norm() > 0.0);
}

TEST_CASE("M x equals the direct linear-form error on random input") {
  const auto gen = testutil::instance(3, 202);
  const auto layout = StackedVariableLayout::build(gen.graph);
  Rng rng(8);
  for (const auto& pair : enumerate_pairs(gen.graph)) {
    const MatX Z = oracles::random_symmetric(rng, 3 * layout.N);
    const double y = rng.gaussian();
    const double d1 = rng.gaussian();
    const double d2 = rng.gaussian();

    VecX x = VecX::Zero(layout.dim());
    x.head(layout.vec_len) = vec(Z);
    x[layout.y_index] = y;
    x[layout.distance_column(gen.graph, pair.edge, pair.j1)] = d1;
    x[layout.distance_column(gen.graph, pair.edge, pair.j2)] = d2;

    const MatX M = linear_error_row(gen.graph, pair, layout);
    const Vec3 direct = oracles::direct_linear_error(gen.graph, pair, Z, y, d1, d2);
    CHECK((M * x - direct).norm() < 1e-12 * (1.0 + direct.norm()));
  }
}

TEST_CASE("build_Q: PSD, annihilates truth, and matches the residual-sum oracle") {
  const auto gen = testutil::instance(3, 303);
  const auto layout = StackedVariableLayout::build(gen.graph);
  const auto pairs = enumerate_pairs(gen.graph);
  const MatX Q = build_Q(gen.graph, pairs, layout);

  Eigen::SelfAdjointEigenSolver<MatX> eig(Q);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-9 * Q.norm());

  const VecX xt = truth_x(gen, layout);
  CHECK(xt.dot(Q * xt) < 1e-9 * (1.0 + Q.norm()));

  Rng rng(31);
  for (int it = 0; it < 10; ++it) {
    VecX x(layout.dim());
    for (int i = 0; i < x.size(); ++i) x[i] = rng.gaussian();
    double direct = 0.0;
    for (const auto& pair : pairs) {
      direct += (linear_error_row(gen.graph, pair, layout) * x).squaredNorm();
    }
    const double quad = x.dot(Q * x);
    CHECK(quad == doctest::Approx(direct).epsilon(1e-10).scale(1.0 + direct));
  }
}

TEST_CASE("single-pair Q has rank at most 3") {
  const auto gen = testutil::tiny(5);
  const auto layout = StackedVariableLayout::build(gen.graph);
  const auto pairs = enumerate_pairs(gen.graph);
  const MatX Q = build_Q(gen.graph, {pairs.front()}, layout);
  Eigen::SelfAdjointEigenSolver<MatX> eig(Q);
  int rank = 0;
  const double lam_max = eig.eigenvalues().maxCoeff();
  for (int i = 0; i < eig.eigenvalues().size(); ++i) {
    if (eig.eigenvalues()[i] > 1e-12 * lam_max) ++rank;
  }
  CHECK(rank <= 3);
}

TEST_CASE("marginalization equals the inner minimization oracle") {
  const auto gen = testutil::instance(3, 404, 0.01);  // noise so Q has no exact kernel
  const auto layout = StackedVariableLayout::build(gen.graph);
  const MatX Q = build_Q(gen.graph, enumerate_pairs(gen.graph), layout);
  const auto marg = marginalize_distances(Q, layout);

  Eigen::SelfAdjointEigenSolver<MatX> eig(marg.Qbar);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-9 * marg.Qbar.norm());

  Rng rng(17);
  const int nd = layout.distance_count();
  for (int it = 0; it < 10; ++it) {
    VecX z(layout.dist_offset);
    for (int i = 0; i < z.size(); ++i) z[i] = rng.gaussian();
    const double via_schur = z.dot(marg.Qbar * z);
    const double via_oracle = oracles::marginal_min_over_d(Q, z, nd);
    CHECK(via_schur ==
          doctest::Approx(via_oracle).epsilon(1e-8).scale(1.0 + std::abs(via_oracle)));
  }
}

TEST_CASE("epigraph inequality holds for arbitrary distance choices") {
  const auto gen = testutil::instance(3, 505, 0.02);
  const auto layout = StackedVariableLayout::build(gen.graph);
  const MatX Q = build_Q(gen.graph, enumerate_pairs(gen.graph), layout);
  const auto marg = marginalize_distances(Q, layout);

  Rng rng(77);
  const int nd = layout.distance_count();
  for (int it = 0; it < 20; ++it) {
    VecX z(layout.dist_offset);
    for (int i = 0; i < z.size(); ++i) z[i] = rng.gaussian();
    VecX full(layout.dim());
    VecX d(nd);
    for (int i = 0; i < nd; ++i) d[i] = rng.gaussian();
    full << z, d;
    const double lhs = z.dot(marg.Qbar * z);
    CHECK(lhs <= full.dot(Q * full) + 1e-8 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("no-distance-variables graph leaves Q untouched") {
  auto gen = testutil::tiny(3);
  gen.graph.edges.clear();
  const auto layout = StackedVariableLayout::build(gen.graph);
  CHECK(layout.distance_count() == 0);
  const MatX Q = MatX::Identity(layout.dim(), layout.dim());
  const auto marg = marginalize_distances(Q, layout);
  CHECK((marg.Qbar - Q).norm() == 0.0);
}

TEST_CASE("unified form from U, V, W vanishes at the truth") {
  const auto gen = testutil::instance(3, 606);
  const auto pairs = enumerate_pairs(gen.graph);
  const QuadraticForm form = build_schur(gen.graph, pairs);
  const MatX Zt = ground_truth_gram(gen.truth.poses);
  CHECK(std::abs(form.evaluate(Zt)) < 1e-9 * form.scale());

  // Dense-variant gradient agrees with finite differences.
  Rng rng(4);
  const MatX Z = oracles::random_psd(rng, form.dim());
  const MatX G = form.gradient(Z);
  auto f = [&](const MatX& M) { return form.evaluate(M); };
  for (int it = 0; it < 5; ++it) {
    const MatX dZ = oracles::random_symmetric(rng, form.dim());
    const double fd = oracles::directional_fd(f, Z, dZ);
    CHECK(G.cwiseProduct(dZ).sum() ==
          doctest::Approx(fd).epsilon(1e-6).scale(1.0 + std::abs(fd)));
  }
}

TEST_CASE("recovered distances match truth at zero noise and the dense oracle elsewhere") {
  const auto gen = testutil::instance(3, 707);
  const auto layout = StackedVariableLayout::build(gen.graph);
  const MatX Q = build_Q(gen.graph, enumerate_pairs(gen.graph), layout);

  VecX zt(layout.dist_offset);
  zt.head(layout.vec_len) = vec(ground_truth_gram(gen.truth.poses));
  zt[layout.y_index] = 1.0;
  const VecX d = recover_distances_from_schur(Q, layout, zt);
  int k = 0;
  for (const auto& dists : gen.truth.distances) {
    for (double truth : dists) {
      CHECK(d[k++] == doctest::Approx(truth).epsilon(1e-8));
    }
  }

  Rng rng(13);
  VecX z(layout.dist_offset);
  for (int i = 0; i < z.size(); ++i) z[i] = rng.gaussian();
  const VecX d_lib = recover_distances_from_schur(Q, layout, z);
  const VecX d_ora = oracles::least_squares_d(Q, z, layout.distance_count());
  CHECK((d_lib - d_ora).norm() < 1e-8 * (1.0 + d_ora.norm()));
}

TEST_CASE("two-measurement distance solve matches the hand-built system") {
  // One edge, two timestamps: the 3x2 system [-g1 g2] d = Z_xy t_tgt - t_obs
  // solved in least squares, against explicit 2x2 normal equations.
  const auto gen = testutil::tiny(23);
  ObservationGraph g = gen.graph;
  g.edges.resize(1);
  g.edges[0].measurements.resize(2);
  const auto layout = StackedVariableLayout::build(g);
  const auto pairs = enumerate_pairs(g);
  REQUIRE(pairs.size() == 1);
  const MatX Q = build_Q(g, pairs, layout);

  VecX zt(layout.dist_offset);
  zt.head(layout.vec_len) = vec(ground_truth_gram(gen.truth.poses));
  zt[layout.y_index] = 1.0;
  const VecX d = recover_distances_from_schur(Q, layout, zt);

  const auto& edge = g.edges[0];
  const auto* o1 = g.odometry_at(edge.observer, pairs[0].j1);
  const auto* o2 = g.odometry_at(edge.observer, pairs[0].j2);
  const auto* t1 = g.odometry_at(edge.observed, pairs[0].j1);
  const auto* t2 = g.odometry_at(edge.observed, pairs[0].j2);
  const Vec3 g1 = o1->R * edge.measurements[0].b;
  const Vec3 g2 = o2->R * edge.measurements[1].b;
  Eigen::Matrix<double, 3, 2> A;
  A.col(0) = -g1;
  A.col(1) = g2;
  const MatX Zt = ground_truth_gram(gen.truth.poses);
  const Vec3 rhs = Zt.block<3, 3>(3 * (edge.observer - 1), 3 * (edge.observed - 1)) *
                       (t2->p - t1->p) -
                   (o2->p - o1->p);
  const Eigen::Vector2d hand = (A.transpose() * A).ldlt().solve(A.transpose() * rhs);
  CHECK(d[0] == doctest::Approx(hand[0]).epsilon(1e-8));
  CHECK(d[1] == doctest::Approx(hand[1]).epsilon(1e-8));
}

}  // TEST_SUITE
