#pragma once

#include <string>
#include <vector>

#include "certiloc/pipeline.hpp"
#include "certiloc/synthgen.hpp"

namespace certiloc {

// One (dataset, method) benchmark outcome; timing columns sit at the end of
// the CSV so reruns differ only there.
struct RunRecord {
  std::string suite;
  std::string name;
  int N = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string method;
  std::string formulation;
  double cost = 0.0;            // f at the recovered solution
  double solver_cost = 0.0;     // f at the solver iterate
  double sdp_lower_bound = 0.0; // unrounded relaxed objective (SDP methods)
  double cost_at_gt = 0.0;      // f at the ground-truth Gram
  double form_scale = 0.0;
  double lambda_ratio = 0.0;
  double rot_err_max = 0.0;     // radians, vs ground truth
  double rot_err_mean = 0.0;
  double trans_rmse = 0.0;      // meters
  int rounds = 0;
  int iterations = 0;
  bool rank_ok = false;
  bool converged = false;
  bool cert_ok = false;
  bool optimal = false;         // cost <= best-of-dataset + 1e-6 * (1 + scale)
  std::string status = "ok";
  double wall_s = 0.0;
};

struct BenchOptions {
  std::vector<Method> methods = {Method::ConvexIteration, Method::SdpOnly, Method::Riemannian,
                                 Method::Lm};
  Formulation formulation = Formulation::Cross;
  PairPolicy policy = PairPolicy::consecutive();
  int threads = 0;  // 0 = hardware concurrency, capped by CERTILOC_THREADS
};

struct BenchDataset {
  GenConfig config;
  ObservationGraph graph;
};

// Runs every (dataset, method) job across a worker pool and fills the
// optimality flags per dataset. Row order is deterministic: datasets in
// input order, methods in option order.
std::vector<RunRecord> bench_suite(const std::string& suite,
                                   const std::vector<BenchDataset>& datasets,
                                   const BenchOptions& options = {});

// Worker count after applying the CERTILOC_THREADS cap.
int effective_thread_count(int requested);

std::string records_to_csv(const std::vector<RunRecord>& records);
std::string aggregate_to_csv(const std::vector<RunRecord>& records);

}  // namespace certiloc
