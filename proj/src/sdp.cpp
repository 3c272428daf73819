#include "certiloc/sdp.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "certiloc/error.hpp"
#include "certiloc/rng.hpp"

namespace certiloc {

MatX project_constraint(MatX Z) {
  for (int i = 0; i < Z.rows(); i += 3) {
    Z.block<3, 3>(i, i) = Mat3::Identity();
  }
  return Z;
}

MatX project_psd(const MatX& Z) {
  Eigen::SelfAdjointEigenSolver<MatX> eig(Z);
  VecX ev = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

namespace {

// Free entries of Z under Z_ii = I3: every (r, c) with block(r) < block(c),
// nine per block pair, column-major within the pair. Z is completed by
// symmetry, so iterates are exactly feasible for the affine constraints.
struct FreeEntries {
  std::vector<std::pair<int, int>> rc;

  explicit FreeEntries(int N) {
    for (int bi = 0; bi < N; ++bi) {
      for (int bj = bi + 1; bj < N; ++bj) {
        for (int c = 3 * bj; c < 3 * bj + 3; ++c) {
          for (int r = 3 * bi; r < 3 * bi + 3; ++r) {
            rc.emplace_back(r, c);
          }
        }
      }
    }
  }

  int size() const { return static_cast<int>(rc.size()); }
};

// Hessian of the quadratic part on the free-entry basis E_a = e_r e_c^T +
// e_c e_r^T:  H[a, b] = 2 sum_k tr(A_k E_a B_k E_b). Rank-one terms touch a
// single block pair, so each contributes a 9x9 update.
MatX quad_param_hessian(const QuadraticForm& form, const FreeEntries& basis) {
  const int np = basis.size();
  const int N = form.N;
  MatX H = MatX::Zero(np, np);

  if (!form.terms.empty()) {
    std::vector<int> seg_of_pair(static_cast<std::size_t>(N * N), -1);
    {
      int seg = 0;
      for (int bi = 0; bi < N; ++bi)
        for (int bj = bi + 1; bj < N; ++bj)
          seg_of_pair[static_cast<std::size_t>(bi * N + bj)] = seg++;
    }
    Eigen::Matrix<double, 9, 1> w;
    for (const auto& term : form.terms) {
      const int X = term.obs - 1;
      const int Y = term.tgt - 1;
      if (X == Y) continue;
      const int bi = std::min(X, Y);
      const int bj = std::max(X, Y);
      const int base = 9 * seg_of_pair[static_cast<std::size_t>(bi * N + bj)];
      // w[3*cq+rq] = a[r] b[c] + a[c] b[r] with a in block Y, b in block X.
      for (int cq = 0; cq < 3; ++cq) {
        for (int rq = 0; rq < 3; ++rq) {
          w[3 * cq + rq] = (Y == bi) ? term.t[rq] * term.k[cq] : term.k[rq] * term.t[cq];
        }
      }
      H.block<9, 9>(base, base) += 2.0 * (w * w.transpose());
    }
  } else if (form.quad_dense) {
    const MatX Us = *form.quad_dense + form.quad_dense->transpose();
    const int d = 3 * N;
    std::vector<int> i1(static_cast<std::size_t>(np)), i2(static_cast<std::size_t>(np));
    for (int a = 0; a < np; ++a) {
      const auto [r, c] = basis.rc[static_cast<std::size_t>(a)];
      i1[static_cast<std::size_t>(a)] = c * d + r;
      i2[static_cast<std::size_t>(a)] = r * d + c;
    }
    for (int a = 0; a < np; ++a) {
      for (int b = a; b < np; ++b) {
        const double v = Us(i1[static_cast<std::size_t>(a)], i1[static_cast<std::size_t>(b)]) +
                         Us(i1[static_cast<std::size_t>(a)], i2[static_cast<std::size_t>(b)]) +
                         Us(i2[static_cast<std::size_t>(a)], i1[static_cast<std::size_t>(b)]) +
                         Us(i2[static_cast<std::size_t>(a)], i2[static_cast<std::size_t>(b)]);
        H(a, b) = v;
        H(b, a) = v;
      }
    }
  }
  return H;
}

double min_eigenvalue(const MatX& S) {
  Eigen::SelfAdjointEigenSolver<MatX> eig(S, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

// Random-probe convexity check of the quadratic part; returns the smallest
// probed curvature normalized by the probe norm.
double psd_probe(const QuadraticForm& form, const SdpSettings& settings) {
  Rng rng(settings.probe_seed);
  const int d = form.dim();
  double min_curv = 0.0;
  for (int it = 0; it < settings.psd_probe_count; ++it) {
    MatX S(d, d);
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) S(r, c) = rng.gaussian();
    S = 0.5 * (S + S.transpose());
    const double nrm2 = S.squaredNorm();
    if (nrm2 == 0.0) continue;
    const double curv = form.quad_value(S) / nrm2;
    if (it == 0 || curv < min_curv) min_curv = curv;
  }
  return min_curv;
}

// log det via Cholesky; false when not positive definite.
bool logdet_pd(const MatX& Z, double* out) {
  Eigen::LLT<MatX> llt(Z);
  if (llt.info() != Eigen::Success) return false;
  double ld = 0.0;
  for (int i = 0; i < Z.rows(); ++i) ld += std::log(llt.matrixL()(i, i));
  *out = 2.0 * ld;
  return true;
}

}  // namespace

RelaxedSolution solve_relaxed(const QuadraticForm& form, const MatX* extra_linear,
                              const SdpSettings& settings, const MatX* warm_start) {
  const auto t0 = std::chrono::steady_clock::now();
  const int d = form.dim();
  const int N = form.N;

  const double min_curv = psd_probe(form, settings);
  if (min_curv < -1e-9 * form.scale()) {
    throw SolverError("solve_relaxed: quadratic part failed the PSD probe");
  }

  MatX Lsym = MatX::Zero(d, d);
  if (extra_linear) Lsym = 0.5 * (*extra_linear + extra_linear->transpose());

  // Normalize the objective so the barrier schedule is scale free.
  double s0 = std::abs(form.constant) + form.linear.norm() + Lsym.norm();
  for (const auto& t : form.terms) s0 += t.t.squaredNorm() * t.k.squaredNorm();
  if (form.quad_dense) s0 += std::abs(form.quad_dense->trace());
  if (!(s0 > 0.0) || !std::isfinite(s0)) s0 = 1.0;
  const double inv_s0 = 1.0 / s0;

  const FreeEntries basis(N);
  const int np = basis.size();

  const MatX Hf = inv_s0 * quad_param_hessian(form, basis);

  // Objective (normalized, constant dropped) and its gradient matrix.
  auto value = [&](const MatX& Z) {
    double v = form.quad_value(Z) + form.linear.transpose().cwiseProduct(Z).sum();
    v += Lsym.cwiseProduct(Z).sum();
    return v * inv_s0;
  };
  auto grad_matrix = [&](const MatX& Z) { return MatX(inv_s0 * (form.gradient(Z) + Lsym)); };

  MatX Z = MatX::Identity(d, d);
  if (warm_start && warm_start->rows() == d) {
    // Pull the warm start strictly inside the cone before restarting the path.
    Z = project_constraint(0.8 * *warm_start + 0.2 * MatX::Identity(d, d));
    double ld;
    if (!logdet_pd(Z, &ld)) Z = MatX::Identity(d, d);
  }

  SdpStats stats;
  stats.min_probed_curvature = min_curv;

  double mu = settings.mu0;
  double mu_centered = settings.mu0;  // last mu whose centering made progress
  int total_newton = 0;
  double decrement = 0.0;
  bool budget_left = true;

  VecX grad(np), dp(np);
  MatX Hbar(np, np);

  while (true) {
    bool progressed = false;
    // Center at the current mu.
    for (int inner = 0; inner < settings.max_newton_per_mu; ++inner) {
      if (total_newton >= settings.max_iter) {
        budget_left = false;
        break;
      }
      ++total_newton;

      Eigen::LLT<MatX> lltZ(Z);
      if (lltZ.info() != Eigen::Success) {
        // The iterate sits against the cone boundary beyond double precision;
        // keep the last centered point.
        budget_left = true;
        break;
      }
      const MatX Zinv = lltZ.solve(MatX::Identity(d, d));
      const MatX G = grad_matrix(Z);

      for (int a = 0; a < np; ++a) {
        const auto [r, c] = basis.rc[static_cast<std::size_t>(a)];
        grad[a] = 2.0 * (G(r, c) - mu * Zinv(r, c));
      }
      // Barrier Hessian: tr(Z^-1 E_a Z^-1 E_b) has a closed form in Zinv.
      for (int a = 0; a < np; ++a) {
        const auto [ra, ca] = basis.rc[static_cast<std::size_t>(a)];
        for (int b = a; b < np; ++b) {
          const auto [rb, cb] = basis.rc[static_cast<std::size_t>(b)];
          const double v =
              2.0 * (Zinv(ra, rb) * Zinv(ca, cb) + Zinv(ra, cb) * Zinv(ca, rb));
          Hbar(a, b) = v;
          Hbar(b, a) = v;
        }
      }
      MatX H = Hf + mu * Hbar;

      Eigen::LLT<MatX> llt(H);
      if (llt.info() != Eigen::Success) {
        H.diagonal().array() += 1e-12 * (1.0 + H.diagonal().maxCoeff());
        llt.compute(H);
        if (llt.info() != Eigen::Success) {
          throw SolverError("solve_relaxed: Newton system not positive definite");
        }
      }
      dp = llt.solve(-grad);
      decrement = std::sqrt(std::max(0.0, -grad.dot(dp)));

      if (decrement <= settings.newton_tol * (1.0 + mu)) {
        progressed = true;
        break;
      }

      // Backtracking line search with positive-definiteness guard.
      MatX step = MatX::Zero(d, d);
      for (int a = 0; a < np; ++a) {
        const auto [r, c] = basis.rc[static_cast<std::size_t>(a)];
        step(r, c) = dp[a];
        step(c, r) = dp[a];
      }
      double ld0;
      if (!logdet_pd(Z, &ld0)) break;
      const double phi0 = value(Z) - mu * ld0;

      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const MatX Zt = Z + t * step;
        double ld;
        if (logdet_pd(Zt, &ld)) {
          const double phi = value(Zt) - mu * ld;
          if (phi <= phi0 - 1e-4 * t * decrement * decrement) {
            Z = Zt;
            moved = true;
            progressed = true;
            break;
          }
        }
        t *= 0.5;
      }
      if (!moved) break;  // centered to line-search resolution

      if (settings.record_trace) stats.objective_trace.push_back(s0 * value(Z));
    }

    if (progressed) {
      mu_centered = mu;
    } else {
      break;  // below the resolution of the merit function; deeper mu is noise
    }
    if (!budget_left || mu <= settings.mu_min) break;
    {
      // Following the path further than the conditioning of Z allows only
      // corrupts the dual recovery; transversal optima hit this wall while
      // flat-valley geometries keep Z well conditioned all the way down.
      Eigen::SelfAdjointEigenSolver<MatX> eig(Z, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() <
          settings.cond_floor * eig.eigenvalues().maxCoeff()) {
        break;
      }
    }
    mu = std::max(mu * settings.mu_shrink, settings.mu_min);
  }

  RelaxedSolution out;
  out.Z = Z;

  // Central-path duals: S = mu * Z^-1 (PSD by construction), Lambda from the
  // diagonal blocks of S - G.
  MatX Zinv;
  {
    Eigen::LLT<MatX> lltZ(Z);
    if (lltZ.info() == Eigen::Success) {
      Zinv = lltZ.solve(MatX::Identity(d, d));
    } else {
      Eigen::SelfAdjointEigenSolver<MatX> eig(Z);
      const VecX ev = eig.eigenvalues().cwiseMax(1e-300);
      Zinv = eig.eigenvectors() * ev.cwiseInverse().asDiagonal() *
             eig.eigenvectors().transpose();
    }
  }
  const MatX G = s0 * grad_matrix(Z);  // un-normalized gradient
  MatX S = s0 * mu_centered * 0.5 * (Zinv + Zinv.transpose());
  MatX Lambda = MatX::Zero(d, d);
  for (int i = 0; i < d; i += 3) {
    const Mat3 blk = S.block<3, 3>(i, i) - G.block<3, 3>(i, i);
    Lambda.block<3, 3>(i, i) = 0.5 * (blk + blk.transpose());
  }

  DualCertificate cert;
  cert.Lambda = Lambda;
  cert.S = G + Lambda;
  cert.stationarity = (cert.S - S).norm();
  cert.min_eig_S = min_eigenvalue(cert.S);
  cert.complementarity = std::abs((cert.S * Z).trace());

  stats.iterations = total_newton;
  stats.converged = budget_left;
  stats.objective = form.evaluate(Z);
  stats.mu_final = mu_centered;
  stats.gap_bound = 3.0 * N * mu_centered * s0;
  stats.newton_decrement = decrement;
  stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.certificate = std::move(cert);
  out.stats = std::move(stats);
  return out;
}

CertReport check_certificate(const QuadraticForm& form, const MatX& Z,
                             const DualCertificate& cert, const MatX* extra_linear,
                             double tau) {
  const int d = form.dim();
  MatX G = form.gradient(Z);
  if (extra_linear) G += 0.5 * (*extra_linear + extra_linear->transpose());

  CertReport rep;
  rep.tau = tau > 0.0 ? tau : 1e-6 * (1.0 + G.norm());

  double block_err = 0.0;
  for (int i = 0; i < d; i += 3) {
    block_err = std::max(block_err, (Z.block<3, 3>(i, i) - Mat3::Identity()).norm());
  }
  rep.primal_block_error = block_err;
  rep.primal_min_eig = min_eigenvalue(Z);
  rep.stationarity = (G + cert.Lambda - cert.S).norm();
  rep.dual_min_eig = min_eigenvalue(cert.S);
  rep.complementarity = std::abs((cert.S * Z).trace());

  rep.primal_ok = block_err <= rep.tau && rep.primal_min_eig >= -rep.tau;
  rep.stationarity_ok = rep.stationarity <= rep.tau;
  rep.dual_ok = rep.dual_min_eig >= -rep.tau;
  rep.complementarity_ok = rep.complementarity <= rep.tau * (1.0 + Z.norm());
  return rep;
}

}  // namespace certiloc
