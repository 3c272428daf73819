#pragma once

#include <cstdint>
#include <string>

#include "certiloc/conviter.hpp"
#include "certiloc/graph.hpp"
#include "certiloc/recovery.hpp"

namespace certiloc {

enum class Method { ConvexIteration, SdpOnly, Riemannian, Lm };
enum class Formulation { Cross, Schur };

std::string to_string(Method m);
std::string to_string(Formulation f);
Method method_from_string(const std::string& s);
Formulation formulation_from_string(const std::string& s);

struct SolveOptions {
  Formulation formulation = Formulation::Cross;
  Method method = Method::ConvexIteration;
  PairPolicy policy = PairPolicy::consecutive();
  ConvIterSettings conviter;
  std::uint64_t seed = 0;  // initializer seed for the local methods
};

// Everything the benchmark and the report files need about one solve.
struct SolveReport {
  std::string method;
  std::string formulation;
  int rounds = 0;  // SDP solves (1 = plain relaxation only)
  std::vector<RoundRecord> round_records;
  double final_cost = 0.0;     // f at the recovered solution's Gram
  double solver_cost = 0.0;    // f at the solver iterate (Z* or R^T R)
  double sdp_objective = 0.0;  // unrounded relaxed objective (lower bound)
  double lambda_ratio = 0.0;
  VecX spectrum;               // descending eigenvalues of the solver Z
  CertReport certificate;
  bool has_certificate = false;
  bool converged = false;
  bool rank_ok = false;
  int iterations = 0;          // total inner iterations
  double build_seconds = 0.0;
  double solve_seconds = 0.0;
  double recovery_seconds = 0.0;
};

struct PipelineResult {
  PoseSolution solution;
  SolveReport report;
};

// Build form -> solve (per method) -> recover poses. Local methods are
// initialized from random_rotation_set(seed).
PipelineResult solve_dataset(const ObservationGraph& graph, const SolveOptions& options = {});

std::string solution_to_json(const PoseSolution& solution);
std::string report_to_json(const SolveReport& report);

}  // namespace certiloc
