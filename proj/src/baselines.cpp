#include "certiloc/baselines.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "certiloc/error.hpp"
#include "certiloc/recovery.hpp"
#include "certiloc/rng.hpp"

namespace certiloc {

namespace {

MatX stack(const std::vector<Mat3>& R) {
  MatX M(3, 3 * static_cast<int>(R.size()));
  for (std::size_t i = 0; i < R.size(); ++i) M.block<3, 3>(0, 3 * static_cast<int>(i)) = R[i];
  return M;
}

double cost_of(const QuadraticForm& form, const MatX& Rstack) {
  return form.evaluate(Rstack.transpose() * Rstack);
}

}  // namespace

MatX euclidean_rotation_gradient(const QuadraticForm& form, const std::vector<Mat3>& R) {
  const MatX Rs = stack(R);
  const MatX G = form.gradient(Rs.transpose() * Rs);  // symmetric
  return 2.0 * Rs * G;
}

LocalSolveResult riemannian_descent(const QuadraticForm& form, std::vector<Mat3> R0,
                                    const RiemannianOptions& opts) {
  const int N = static_cast<int>(R0.size());
  MatX R = stack(R0);
  double cost = cost_of(form, R);

  LocalSolveResult result;
  double step = opts.initial_step;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const MatX egrad = 2.0 * R * form.gradient(R.transpose() * R);

    // Tangent projection per block: xi_i = R_i * skew(R_i^T E_i).
    MatX xi(3, 3 * N);
    double grad_norm2 = 0.0;
    for (int i = 0; i < N; ++i) {
      const Mat3 Ri = R.block<3, 3>(0, 3 * i);
      const Mat3 W = Ri.transpose() * egrad.block<3, 3>(0, 3 * i);
      const Mat3 skew = 0.5 * (W - W.transpose());
      const Mat3 t = Ri * skew;
      xi.block<3, 3>(0, 3 * i) = t;
      grad_norm2 += t.squaredNorm();
    }
    const double grad_norm = std::sqrt(grad_norm2);
    if (grad_norm < opts.grad_tol * (1.0 + std::abs(cost))) {
      result.converged = true;
      break;
    }

    // Armijo backtracking along -xi with SVD retraction.
    double t_step = step;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      MatX trial(3, 3 * N);
      for (int i = 0; i < N; ++i) {
        trial.block<3, 3>(0, 3 * i) =
            project_so3(Mat3(R.block<3, 3>(0, 3 * i) - t_step * xi.block<3, 3>(0, 3 * i)));
      }
      const double trial_cost = cost_of(form, trial);
      if (trial_cost <= cost - opts.armijo_c * t_step * grad_norm2) {
        R = trial;
        cost = trial_cost;
        accepted = true;
        break;
      }
      t_step *= opts.shrink;
    }
    if (!accepted) break;
    step = std::min(t_step * 2.0, opts.initial_step);
  }

  result.iterations = it;
  result.cost = cost;
  result.rotations.resize(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) result.rotations[static_cast<std::size_t>(i)] = R.block<3, 3>(0, 3 * i);
  return result;
}

LocalSolveResult lm_solve(const ObservationGraph& graph, const std::vector<PairIndex>& pairs,
                          std::vector<Mat3> R0, const LmOptions& opts) {
  const int N = graph.robot_count();
  if (static_cast<int>(R0.size()) != N) {
    throw std::invalid_argument("lm_solve: initializer size mismatch");
  }

  // Precompute per-pair data once.
  struct PairData {
    int X, Y;
    Vec3 k, t_obs, t_tgt;
  };
  std::vector<PairData> data;
  data.reserve(pairs.size());
  for (const auto& pr : pairs) {
    const auto term = pair_term(graph, pr);
    if (!term) continue;
    data.push_back({term->observer - 1, term->observed - 1, term->kernel, term->t_obs,
                    term->t_tgt});
  }
  if (data.empty()) throw SolverError("lm_solve: all pairs degenerate");

  const int m = static_cast<int>(data.size());
  auto residuals = [&](const std::vector<Mat3>& R, VecX& r) {
    for (int p = 0; p < m; ++p) {
      const auto& d = data[static_cast<std::size_t>(p)];
      const Vec3 w = R[static_cast<std::size_t>(d.X)].transpose() *
                     (R[static_cast<std::size_t>(d.Y)] * d.t_tgt);
      r[p] = d.k.dot(w - d.t_obs);
    }
  };

  std::vector<Mat3> R = std::move(R0);
  VecX r(m);
  residuals(R, r);
  double cost = r.squaredNorm();
  double lambda = opts.lambda_init;

  LocalSolveResult result;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    // Jacobian wrt right increments R_i <- R_i Exp(delta_i).
    MatX J = MatX::Zero(m, 3 * N);
    for (int p = 0; p < m; ++p) {
      const auto& d = data[static_cast<std::size_t>(p)];
      const Mat3 Rxy = R[static_cast<std::size_t>(d.X)].transpose() *
                       R[static_cast<std::size_t>(d.Y)];
      const Vec3 w = Rxy * d.t_tgt;
      J.row(p).segment<3>(3 * d.X) = d.k.cross(w);                       // -(w x k)
      J.row(p).segment<3>(3 * d.Y) = d.t_tgt.cross(Vec3(Rxy.transpose() * d.k));
    }

    const MatX JtJ = J.transpose() * J;
    const VecX Jtr = J.transpose() * r;

    bool stepped = false;
    VecX delta;
    while (lambda <= opts.lambda_max) {
      MatX H = JtJ;
      H.diagonal().array() += lambda;
      delta = H.ldlt().solve(-Jtr);

      std::vector<Mat3> trial = R;
      for (int i = 0; i < N; ++i) {
        trial[static_cast<std::size_t>(i)] =
            trial[static_cast<std::size_t>(i)] * exp_so3(delta.segment<3>(3 * i));
      }
      VecX rt(m);
      residuals(trial, rt);
      const double trial_cost = rt.squaredNorm();
      if (trial_cost < cost) {
        R = std::move(trial);
        r = rt;
        cost = trial_cost;
        lambda = std::max(lambda * opts.lambda_shrink, 1e-12);
        stepped = true;
        break;
      }
      lambda *= opts.lambda_grow;
    }
    if (!stepped) break;
    if (delta.norm() < opts.step_tol) {
      result.converged = true;
      ++it;
      break;
    }
  }

  result.iterations = it;
  result.cost = cost;
  result.rotations = std::move(R);
  return result;
}

std::vector<Mat3> random_rotation_set(int N, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Mat3> out;
  out.reserve(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    double q[4];
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (double& v : q) {
        v = rng.gaussian();
        n2 += v * v;
      }
    } while (n2 < 1e-30);
    const double inv = 1.0 / std::sqrt(n2);
    out.push_back(quat_to_rot(q[0] * inv, q[1] * inv, q[2] * inv, q[3] * inv));
  }
  return out;
}

}  // namespace certiloc
