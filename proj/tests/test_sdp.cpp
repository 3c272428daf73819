#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "certiloc/error.hpp"
#include "certiloc/form_cross.hpp"
#include "certiloc/sdp.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace certiloc;

TEST_SUITE("sdp") {

TEST_CASE("project_constraint pins diagonal blocks only") {
  CHECK((project_constraint(MatX::Zero(6, 6)) - MatX::Identity(6, 6)).norm() == 0.0);

  Rng rng(1);
  MatX Z = oracles::random_symmetric(rng, 9);
  const MatX P = project_constraint(Z);
  for (int i = 0; i < 9; i += 3) {
    CHECK((P.block<3, 3>(i, i) - Mat3::Identity()).norm() == 0.0);
  }
  CHECK((P.block<3, 3>(0, 3) - Z.block<3, 3>(0, 3)).norm() == 0.0);
  CHECK((P.block<3, 3>(3, 6) - Z.block<3, 3>(3, 6)).norm() == 0.0);

  const MatX member = project_constraint(oracles::random_psd(rng, 6));
  CHECK((project_constraint(member) - member).norm() == 0.0);
}

TEST_CASE("project_psd clamps negative eigenvalues") {
  MatX D = MatX::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = -1.0;
  const MatX P = project_psd(D);
  CHECK(P(0, 0) == doctest::Approx(1.0));
  CHECK(P(1, 1) == doctest::Approx(0.0));

  Rng rng(2);
  const MatX psd = oracles::random_psd(rng, 6);
  CHECK((project_psd(psd) - psd).norm() < 1e-12 * psd.norm());

  // Frobenius optimality against random PSD perturbations.
  const MatX S = oracles::random_symmetric(rng, 5);
  const MatX proj = project_psd(S);
  const double best = (proj - S).norm();
  for (int it = 0; it < 1000; ++it) {
    const MatX cand = project_psd(MatX(S + 0.2 * oracles::random_symmetric(rng, 5)));
    CHECK(best <= (cand - S).norm() + 1e-12);
  }
}

TEST_CASE("zero-noise relaxation is tight and recovers the true Gram") {
  for (int N = 2; N <= 5; ++N) {
    const auto gen = testutil::instance(N, 900 + static_cast<std::uint64_t>(N));
    const QuadraticForm form = build_cross(gen.graph, enumerate_pairs(gen.graph));
    const RelaxedSolution sol = solve_relaxed(form);
    REQUIRE(sol.stats.converged);

    const MatX Zt = ground_truth_gram(gen.truth.poses);
    CHECK((sol.Z - Zt).norm() < 1e-5 * N);

    Eigen::SelfAdjointEigenSolver<MatX> eig(sol.Z);
    const VecX ev = eig.eigenvalues().reverse();
    CHECK(ev[3] / ev[2] < 1e-6);
  }
}

TEST_CASE("pure constant form returns a feasible point with objective C") {
  QuadraticForm form = QuadraticForm::empty(3);
  form.constant = 2.5;
  const RelaxedSolution sol = solve_relaxed(form);
  CHECK(sol.stats.objective == doctest::Approx(2.5));
  for (int i = 0; i < 9; i += 3) {
    CHECK((sol.Z.block<3, 3>(i, i) - Mat3::Identity()).norm() < 1e-8);
  }
  Eigen::SelfAdjointEigenSolver<MatX> eig(sol.Z);
  CHECK(eig.eigenvalues().minCoeff() > -1e-8);
}

TEST_CASE("noised N=2 objective matches the independent reference solver") {
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    const auto gen = testutil::instance(2, seed, 0.03);
    const QuadraticForm form = build_cross(gen.graph, enumerate_pairs(gen.graph));
    const RelaxedSolution sol = solve_relaxed(form);
    const double reference = oracles::reference_min_n2(form);
    CHECK(sol.stats.objective ==
          doctest::Approx(reference).epsilon(1e-5).scale(1.0 + std::abs(reference)));
  }
}

TEST_CASE("certificate passes at zero noise and detects tampered iterates") {
  const auto gen = testutil::instance(3, 42);
  const QuadraticForm form = build_cross(gen.graph, enumerate_pairs(gen.graph));
  const RelaxedSolution sol = solve_relaxed(form);

  const CertReport ok = check_certificate(form, sol.Z, sol.certificate);
  CHECK(ok.primal_ok);
  CHECK(ok.stationarity_ok);
  CHECK(ok.dual_ok);
  CHECK(ok.complementarity_ok);

  MatX Zbad = sol.Z;
  Zbad.block<3, 3>(0, 3).array() += 1e-2;
  Zbad = project_constraint(project_psd(MatX(0.5 * (Zbad + Zbad.transpose()))));
  const CertReport bad = check_certificate(form, Zbad, sol.certificate);
  CHECK(!bad.stationarity_ok);
}

TEST_CASE("noised certificate verdict agrees with the objective gap") {
  for (std::uint64_t seed : {31ull, 77ull}) {
    const auto gen = testutil::instance(2, seed, 0.05);
    const QuadraticForm form = build_cross(gen.graph, enumerate_pairs(gen.graph));
    const RelaxedSolution sol = solve_relaxed(form);
    const double reference = oracles::reference_min_n2(form);
    const bool gap_ok =
        sol.stats.objective <= reference + 1e-5 * (1.0 + std::abs(reference));
    const CertReport rep = check_certificate(form, sol.Z, sol.certificate);
    CHECK(rep.all_ok() == gap_ok);
  }
}

TEST_CASE("argmin is invariant to positive rescaling of the form") {
  const auto gen = testutil::instance(3, 5, 0.02);
  const QuadraticForm form = build_cross(gen.graph, enumerate_pairs(gen.graph));
  QuadraticForm scaled = form;
  const double s = 37.5;
  for (auto& t : scaled.terms) t.t *= std::sqrt(s);  // scales tr(AZBZ) by s
  scaled.linear *= s;
  scaled.constant *= s;

  const RelaxedSolution a = solve_relaxed(form);
  const RelaxedSolution b = solve_relaxed(scaled);
  CHECK((a.Z - b.Z).norm() < 1e-6);
  CHECK(b.stats.objective ==
        doctest::Approx(s * a.stats.objective).epsilon(1e-6).scale(1.0 + s));
}

TEST_CASE("best-so-far objective trace is non-increasing") {
  const auto gen = testutil::instance(3, 8, 0.02);
  const QuadraticForm form = build_cross(gen.graph, enumerate_pairs(gen.graph));
  SdpSettings settings;
  settings.record_trace = true;
  const RelaxedSolution sol = solve_relaxed(form, nullptr, settings);
  REQUIRE(!sol.stats.objective_trace.empty());
  double best = sol.stats.objective_trace.front();
  for (double v : sol.stats.objective_trace) {
    CHECK(std::isfinite(v));
    const double new_best = std::min(best, v);
    CHECK(new_best <= best + 1e-9 * form.scale());
    best = new_best;
  }
}

TEST_CASE("non-convex quadratic part is rejected") {
  QuadraticForm form = QuadraticForm::empty(2);
  form.quad_dense = MatX(-MatX::Identity(36, 36));
  CHECK_THROWS_AS(solve_relaxed(form), SolverError);
}

TEST_CASE("solution stays in the feasible set within stated tolerances") {
  const auto gen = testutil::instance(4, 3, 0.01);
  const QuadraticForm form = build_cross(gen.graph, enumerate_pairs(gen.graph));
  const RelaxedSolution sol = solve_relaxed(form);
  for (int i = 0; i < form.dim(); i += 3) {
    CHECK((sol.Z.block<3, 3>(i, i) - Mat3::Identity()).norm() == 0.0);
  }
  Eigen::SelfAdjointEigenSolver<MatX> eig(sol.Z);
  CHECK(eig.eigenvalues().minCoeff() >=
        -1e-8 * std::max(1.0, eig.eigenvalues().maxCoeff()));
}

}  // TEST_SUITE
