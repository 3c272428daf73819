#include "certiloc/conviter.hpp"

#include <Eigen/Eigenvalues>

namespace certiloc {

EigenTail eigen_tail(const MatX& Z) {
  Eigen::SelfAdjointEigenSolver<MatX> eig(Z);
  const int d = static_cast<int>(Z.rows());

  EigenTail out;
  out.eigenvalues = eig.eigenvalues().reverse();  // descending
  out.C = MatX::Zero(d, d);
  out.h = 0.0;
  // Trailing eigenvectors are the first d-3 columns of the ascending
  // decomposition; ties at the 3/4 boundary keep the solver's column order.
  for (int i = 0; i + 3 < d; ++i) {
    out.h += eig.eigenvalues()[i];
    const VecX u = eig.eigenvectors().col(i);
    out.C.selfadjointView<Eigen::Lower>().rankUpdate(u);
  }
  out.C.triangularView<Eigen::StrictlyUpper>() = out.C.transpose();
  return out;
}

ConvIterResult convex_iteration(const QuadraticForm& form, const ConvIterSettings& settings) {
  ConvIterResult result;
  MatX direction;  // C_k
  double alpha = 0.0;
  bool have_direction = false;

  MatX prev_Z;
  double best_h = 0.0;
  bool have_best = false;

  for (int round = 0; round < settings.max_rounds; ++round) {
    MatX penalty;
    const MatX* extra = nullptr;
    if (have_direction && alpha > 0.0) {
      penalty = alpha * direction;
      extra = &penalty;
    }
    const MatX* warm = round > 0 ? &prev_Z : nullptr;
    RelaxedSolution sol = solve_relaxed(form, extra, settings.sdp, warm);
    prev_Z = sol.Z;

    const double f_val = form.evaluate(sol.Z);
    EigenTail tail = eigen_tail(sol.Z);

    RoundRecord rec;
    rec.f = f_val;
    rec.h = tail.h;
    rec.alpha = alpha;
    rec.spectrum = tail.eigenvalues;
    rec.sdp_iterations = sol.stats.iterations;
    rec.seconds = sol.stats.seconds;
    result.rounds.push_back(rec);

    const double lam1 = tail.eigenvalues[0];
    const double lam3 = tail.eigenvalues[2];
    const double lam4 = tail.eigenvalues.size() > 3 ? tail.eigenvalues[3] : 0.0;
    const double ratio = lam3 > 0.0 ? lam4 / lam3 : 0.0;

    if (!have_best || tail.h < best_h) {
      best_h = tail.h;
      result.Z = sol.Z;
      result.lambda_ratio = ratio;
      result.objective = f_val;
      result.certificate = sol.certificate;
      result.last_stats = sol.stats;
      have_best = true;
    }

    if (tail.eigenvalues.size() <= 3 || ratio < settings.eps_rank ||
        lam4 < settings.eps_rank_abs * lam1) {
      result.Z = sol.Z;
      result.lambda_ratio = ratio;
      result.objective = f_val;
      result.certificate = sol.certificate;
      result.last_stats = sol.stats;
      result.rank_ok = true;
      return result;
    }

    // Division guard: a vanishing tail next to a sizable objective means the
    // rank is already numerically achieved.
    if (tail.h < settings.alpha_guard * std::abs(f_val)) {
      result.Z = sol.Z;
      result.lambda_ratio = ratio;
      result.objective = f_val;
      result.certificate = sol.certificate;
      result.last_stats = sol.stats;
      result.rank_ok = true;
      return result;
    }

    direction = tail.C;
    alpha = std::max(f_val, 0.0) / tail.h;
    have_direction = true;
  }

  result.rank_ok = false;
  return result;
}

}  // namespace certiloc
