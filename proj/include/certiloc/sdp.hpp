#pragma once

#include <optional>
#include <vector>

#include "certiloc/quadratic_form.hpp"

namespace certiloc {

// Interior-point settings. The objective is normalized by its scale before
// solving, so the defaults are dimensionless.
struct SdpSettings {
  double mu0 = 1.0;           // initial barrier weight
  double mu_shrink = 0.1;     // geometric barrier schedule
  double mu_min = 1e-21;      // final barrier weight (gap ~ 3N * mu_min)
  double cond_floor = 1e-11;  // path stop on lambda_min(Z)/lambda_max(Z)
  double newton_tol = 1e-10;  // centering tolerance on the Newton decrement
  int max_newton_per_mu = 50;
  int max_iter = 50000;       // total Newton iterations across the mu path
  bool record_trace = false;  // keep the per-iteration objective trace
  int psd_probe_count = 16;   // random probes of the quadratic part
  std::uint64_t probe_seed = 0x5eed;
};

// Multipliers of the solved program: Lambda for the identity diagonal blocks,
// S for the PSD cone, frozen at the returned iterate. On the central path
// S = mu * Z^-1, which is PSD by construction.
struct DualCertificate {
  MatX Lambda;  // block diagonal 3N x 3N
  MatX S;       // gradient(f + <extra,.>) + Lambda
  double stationarity = 0.0;
  double min_eig_S = 0.0;
  double complementarity = 0.0;
};

struct SdpStats {
  int iterations = 0;       // Newton steps across the whole mu path
  bool converged = false;
  double objective = 0.0;   // f at the returned Z (without extra_linear)
  double mu_final = 0.0;    // on the normalized objective
  double gap_bound = 0.0;   // 3N * mu_final * scale, an optimality-gap bound
  double newton_decrement = 0.0;
  double min_probed_curvature = 0.0;
  double seconds = 0.0;
  std::vector<double> objective_trace;  // filled when record_trace
};

struct RelaxedSolution {
  MatX Z;
  DualCertificate certificate;
  SdpStats stats;
};

// Replaces each diagonal 3x3 block with the identity; off-diagonal entries
// untouched.
MatX project_constraint(MatX Z);

// Frobenius-nearest PSD matrix: eigendecomposition with negative eigenvalues
// clamped to zero.
MatX project_psd(const MatX& Z);

// Minimizes f(Z) + <extra_linear, Z> over {Z >= 0, Z_ii = I3} by a primal
// log-det barrier Newton method on the free off-diagonal entries (the
// diagonal blocks are pinned, so iterates are exactly feasible). Throws
// SolverError when the quadratic part fails the PSD probe; running out of
// Newton budget is reported through stats.converged with the best iterate
// returned.
RelaxedSolution solve_relaxed(const QuadraticForm& form,
                              const MatX* extra_linear = nullptr,
                              const SdpSettings& settings = {},
                              const MatX* warm_start = nullptr);

struct CertReport {
  double tau = 0.0;
  double primal_block_error = 0.0;  // max block deviation from I3
  double primal_min_eig = 0.0;
  double stationarity = 0.0;
  double dual_min_eig = 0.0;
  double complementarity = 0.0;
  bool primal_ok = false;
  bool stationarity_ok = false;
  bool dual_ok = false;
  bool complementarity_ok = false;

  bool all_ok() const { return primal_ok && stationarity_ok && dual_ok && complementarity_ok; }
};

// Re-derives the KKT residuals of (Z, certificate) against a freshly
// computed gradient; tau <= 0 selects the default 1e-6 * (1 + ||grad||_F).
CertReport check_certificate(const QuadraticForm& form, const MatX& Z,
                             const DualCertificate& cert,
                             const MatX* extra_linear = nullptr, double tau = -1.0);

}  // namespace certiloc
