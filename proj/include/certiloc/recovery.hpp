#pragma once

#include <optional>
#include <vector>

#include "certiloc/graph.hpp"
#include "certiloc/quadratic_form.hpp"

namespace certiloc {

// Recovered relative poses in the anchor frame (robot 1 pinned to
// identity/zero). Distances follow the per-edge measurement order.
struct PoseSolution {
  int anchor = 1;
  std::vector<Mat3> rotations;
  std::vector<Vec3> translations;
  std::vector<std::vector<double>> distances;
  double residual_rms = 0.0;
};

// Rank-3 factor Y (3 x 3N) from the top three eigenpairs, with the
// handedness of the first block normalized to det > 0. Throws SolverError
// unless lambda4/lambda3 < eps_rank (or force is set, e.g. for rounding a
// non-tight relaxation).
MatX rank3_factor(const MatX& Z, double eps_rank = 1e-6, bool force = false);

// Frobenius-nearest rotation to M. Throws SolverError when two singular
// values vanish and the rotation is ambiguous.
Mat3 project_so3(const Mat3& M);

// Per-block projection of the rank-3 factor, anchored so the first rotation
// is exactly the identity.
std::vector<Mat3> recover_rotations(const MatX& Z, double eps_rank = 1e-6, bool force = false);

struct TranslationRecovery {
  std::vector<Vec3> translations;               // anchor frame, t_1 = 0
  std::vector<std::vector<double>> distances;   // per edge, per measurement
  double residual_rms = 0.0;
};

// Joint sparse least squares over translations (robot 1 pinned) and one
// distance per measurement, stacked from
//   R_X (R_{X_t} b d + t_{X_t}) + t_X = R_Y t_{Y_t} + t_Y.
// Throws SolverError("under-determined ...") for disconnected graphs or
// otherwise rank-deficient systems.
TranslationRecovery recover_translations_distances(const ObservationGraph& graph,
                                                   const std::vector<Mat3>& rotations);

struct PoseErrors {
  MatX pairwise_rotation_error;  // N x N geodesic angles, radians
  double max_rotation_error = 0.0;
  double mean_rotation_error = 0.0;
  double translation_rmse = 0.0;
  std::optional<double> objective;  // filled when a form is supplied
};

PoseErrors pose_errors(const PoseSolution& solution,
                       const std::vector<GroundTruthPose>& ground_truth,
                       const QuadraticForm* form = nullptr);

}  // namespace certiloc
