#pragma once

#include <cstdint>
#include <vector>

#include "certiloc/form_cross.hpp"
#include "certiloc/quadratic_form.hpp"

namespace certiloc {

struct LocalSolveResult {
  std::vector<Mat3> rotations;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

struct RiemannianOptions {
  int max_iter = 5000;
  double grad_tol = 1e-8;    // stop at ||grad|| < grad_tol * (1 + |g|)
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;
};

// Projected gradient descent over SO(3)^N: tangent projection per block,
// Armijo backtracking, SVD retraction.
LocalSolveResult riemannian_descent(const QuadraticForm& form, std::vector<Mat3> R0,
                                    const RiemannianOptions& opts = {});

struct LmOptions {
  int max_iter = 500;
  double step_tol = 1e-10;
  double lambda_init = 1e-3;
  double lambda_grow = 10.0;
  double lambda_shrink = 0.1;
  double lambda_max = 1e12;
};

// Levenberg-Marquardt on the stacked per-pair scalar errors with per-robot
// axis-angle right-composition increments.
LocalSolveResult lm_solve(const ObservationGraph& graph, const std::vector<PairIndex>& pairs,
                          std::vector<Mat3> R0, const LmOptions& opts = {});

// Haar-uniform rotations via normalized quaternion sampling; deterministic
// per seed.
std::vector<Mat3> random_rotation_set(int N, std::uint64_t seed);

// Euclidean gradient of g(R) = f(R^T R) with respect to the stacked 3 x 3N
// rotation matrix: 2 R G_sym. Exposed for finite-difference checks.
MatX euclidean_rotation_gradient(const QuadraticForm& form, const std::vector<Mat3>& R);

}  // namespace certiloc
