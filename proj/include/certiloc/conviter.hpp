#pragma once

#include <vector>

#include "certiloc/sdp.hpp"

namespace certiloc {

// Closed-form minimizer of tr(C Z) over {tr(C) = 3N-3, 0 <= C <= I}:
// h = sum of the eigenvalues beyond the third, C* = projector onto the
// trailing eigenvectors.
struct EigenTail {
  double h = 0.0;
  MatX C;
  VecX eigenvalues;  // descending
};

EigenTail eigen_tail(const MatX& Z);

struct ConvIterSettings {
  double eps_rank = 1e-6;       // accept when lambda4 / lambda3 < eps_rank
  double eps_rank_abs = 1e-9;   // ... or lambda4 < eps_rank_abs * lambda1
  int max_rounds = 10;          // total SDP solves
  double alpha_guard = 1e-12;   // skip the alpha update when h < guard * f
  SdpSettings sdp;
};

struct RoundRecord {
  double f = 0.0;      // base objective at the round iterate
  double h = 0.0;      // eigenvalue tail
  double alpha = 0.0;  // weight used for this round's solve
  VecX spectrum;       // descending eigenvalues
  int sdp_iterations = 0;
  double seconds = 0.0;
};

struct ConvIterResult {
  MatX Z;
  bool rank_ok = false;          // rank criterion reached within budget
  double lambda_ratio = 0.0;     // lambda4 / lambda3 of the returned iterate
  double objective = 0.0;        // f at the returned iterate
  std::vector<RoundRecord> rounds;
  DualCertificate certificate;   // of the last solved SDP
  SdpStats last_stats;
};

// Alternates the rank-penalized relaxation (extra linear cost alpha * C) with
// the closed-form direction update C = eigen-tail projector and
// alpha = f(Z)/h(Z). Round 0 solves the plain relaxation. When the budget is
// exhausted the lowest-h iterate is returned with rank_ok = false.
ConvIterResult convex_iteration(const QuadraticForm& form, const ConvIterSettings& settings = {});

}  // namespace certiloc
