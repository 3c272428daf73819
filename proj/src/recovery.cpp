#include "certiloc/recovery.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "certiloc/error.hpp"

namespace certiloc {

MatX rank3_factor(const MatX& Z, double eps_rank, bool force) {
  const int d = static_cast<int>(Z.rows());
  Eigen::SelfAdjointEigenSolver<MatX> eig(Z);
  const VecX& ev = eig.eigenvalues();  // ascending

  const double lam1 = ev[d - 1];
  const double lam3 = d >= 3 ? ev[d - 3] : 0.0;
  const double lam4 = d >= 4 ? ev[d - 4] : 0.0;
  if (!force) {
    const double ratio = lam3 > 0.0 ? lam4 / lam3 : 1.0;
    if (d > 3 && ratio >= eps_rank && lam4 >= 1e-9 * lam1) {
      throw SolverError("rank3_factor: solution is not numerically rank-3");
    }
  }

  MatX Y = MatX::Zero(3, d);
  for (int i = 0; i < 3 && i < d; ++i) {
    const double lam = std::max(ev[d - 1 - i], 0.0);
    Y.row(i) = std::sqrt(lam) * eig.eigenvectors().col(d - 1 - i).transpose();
  }
  // One global handedness flip so every near-orthonormal block lands near a
  // proper rotation.
  if (Y.block<3, 3>(0, 0).determinant() < 0.0) {
    Y.row(2) = -Y.row(2);
  }
  return Y;
}

Mat3 project_so3(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (s[1] < 1e-9) {
    throw SolverError("project_so3: degenerate block, rotation ambiguous");
  }
  Mat3 D = Mat3::Identity();
  D(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * D * svd.matrixV().transpose();
}

std::vector<Mat3> recover_rotations(const MatX& Z, double eps_rank, bool force) {
  const MatX Y = rank3_factor(Z, eps_rank, force);
  const int N = static_cast<int>(Z.rows()) / 3;
  std::vector<Mat3> blocks(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    blocks[static_cast<std::size_t>(i)] = project_so3(Y.block<3, 3>(0, 3 * i));
  }
  std::vector<Mat3> out(static_cast<std::size_t>(N));
  out[0] = Mat3::Identity();
  for (int i = 1; i < N; ++i) {
    out[static_cast<std::size_t>(i)] = blocks[0].transpose() * blocks[static_cast<std::size_t>(i)];
  }
  return out;
}

TranslationRecovery recover_translations_distances(const ObservationGraph& graph,
                                                   const std::vector<Mat3>& rotations) {
  const int N = graph.robot_count();
  if (static_cast<int>(rotations.size()) != N) {
    throw std::invalid_argument("recover_translations_distances: rotation count mismatch");
  }
  if (!weakly_connected(graph)) {
    throw SolverError("under-determined: observation graph is disconnected");
  }

  int n_meas = 0;
  for (const auto& e : graph.edges) n_meas += static_cast<int>(e.measurements.size());
  const int n_t = 3 * (N - 1);
  const int n_unknowns = n_t + n_meas;

  // Row triples per measurement:
  //   u * d + t_X - t_Y = R_Y t_{Y_t} - R_X t_{X_t},  u = R_X R_{X_t} b.
  std::vector<Eigen::Triplet<double>> trip;
  VecX b = VecX::Zero(3 * n_meas);
  int row = 0;
  int dcol = n_t;
  for (const auto& e : graph.edges) {
    const Mat3& RX = rotations[static_cast<std::size_t>(e.observer - 1)];
    const Mat3& RY = rotations[static_cast<std::size_t>(e.observed - 1)];
    for (const auto& m : e.measurements) {
      const OdometrySample* ox = graph.odometry_at(e.observer, m.t);
      const OdometrySample* oy = graph.odometry_at(e.observed, m.t);
      if (!ox || !oy) throw DataError("measurement timestamp missing from odometry");
      const Vec3 u = RX * (ox->R * m.b);
      const Vec3 rhs = RY * oy->p - RX * ox->p;
      for (int i = 0; i < 3; ++i) {
        trip.emplace_back(row + i, dcol, u[i]);
        if (e.observer != 1) trip.emplace_back(row + i, 3 * (e.observer - 2) + i, 1.0);
        if (e.observed != 1) trip.emplace_back(row + i, 3 * (e.observed - 2) + i, -1.0);
        b[row + i] = rhs[i];
      }
      row += 3;
      ++dcol;
    }
  }

  Eigen::SparseMatrix<double> A(3 * n_meas, n_unknowns);
  A.setFromTriplets(trip.begin(), trip.end());
  const Eigen::SparseMatrix<double> AtA = (A.transpose() * A).pruned();
  const VecX Atb = A.transpose() * b;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(AtA);
  if (ldlt.info() != Eigen::Success) {
    throw SolverError("under-determined: normal equations not factorizable");
  }
  const VecX diag = ldlt.vectorD();
  const double d_max = diag.cwiseAbs().maxCoeff();
  if (diag.minCoeff() < 1e-12 * d_max) {
    throw SolverError("under-determined: translation/distance system is rank deficient");
  }
  const VecX x = ldlt.solve(Atb);

  TranslationRecovery out;
  out.translations.assign(static_cast<std::size_t>(N), Vec3::Zero());
  for (int i = 1; i < N; ++i) {
    out.translations[static_cast<std::size_t>(i)] = x.segment<3>(3 * (i - 1));
  }
  int k = n_t;
  for (const auto& e : graph.edges) {
    std::vector<double> ds;
    ds.reserve(e.measurements.size());
    for (std::size_t i = 0; i < e.measurements.size(); ++i) ds.push_back(x[k++]);
    out.distances.push_back(std::move(ds));
  }
  const double res2 = (A * x - b).squaredNorm();
  out.residual_rms = std::sqrt(res2 / static_cast<double>(3 * n_meas));
  return out;
}

PoseErrors pose_errors(const PoseSolution& solution,
                       const std::vector<GroundTruthPose>& ground_truth,
                       const QuadraticForm* form) {
  const int N = static_cast<int>(solution.rotations.size());
  if (static_cast<int>(ground_truth.size()) != N) {
    throw std::invalid_argument("pose_errors: ground truth size mismatch");
  }

  PoseErrors err;
  err.pairwise_rotation_error = MatX::Zero(N, N);
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const Mat3 est = solution.rotations[static_cast<std::size_t>(i)].transpose() *
                       solution.rotations[static_cast<std::size_t>(j)];
      const Mat3 tru = ground_truth[static_cast<std::size_t>(i)].R.transpose() *
                       ground_truth[static_cast<std::size_t>(j)].R;
      const double a = geodesic_distance(est, tru);
      err.pairwise_rotation_error(i, j) = a;
      err.max_rotation_error = std::max(err.max_rotation_error, a);
      sum += a;
      ++count;
    }
  }
  err.mean_rotation_error = count > 0 ? sum / count : 0.0;

  // Anchor-relative true translations: R_1^T (p_i - p_1).
  const Mat3& R1 = ground_truth[0].R;
  const Vec3& p1 = ground_truth[0].p;
  double t2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const Vec3 tru = R1.transpose() * (ground_truth[static_cast<std::size_t>(i)].p - p1);
    t2 += (solution.translations[static_cast<std::size_t>(i)] - tru).squaredNorm();
  }
  err.translation_rmse = std::sqrt(t2 / N);

  if (form) {
    err.objective = form->evaluate(gram_from_rotations(solution.rotations));
  }
  return err;
}

}  // namespace certiloc
