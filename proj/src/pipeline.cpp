#include "certiloc/pipeline.hpp"

#include <chrono>

#include <json.hpp>

#include "certiloc/baselines.hpp"
#include "certiloc/error.hpp"
#include "certiloc/form_cross.hpp"
#include "certiloc/form_schur.hpp"

namespace certiloc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::ConvexIteration: return "conviter";
    case Method::SdpOnly: return "sdp";
    case Method::Riemannian: return "riem";
    case Method::Lm: return "lm";
  }
  return "?";
}

std::string to_string(Formulation f) {
  return f == Formulation::Cross ? "cross" : "schur";
}

Method method_from_string(const std::string& s) {
  if (s == "conviter") return Method::ConvexIteration;
  if (s == "sdp") return Method::SdpOnly;
  if (s == "riem") return Method::Riemannian;
  if (s == "lm") return Method::Lm;
  throw DataError("unknown method \"" + s + "\"");
}

Formulation formulation_from_string(const std::string& s) {
  if (s == "cross") return Formulation::Cross;
  if (s == "schur") return Formulation::Schur;
  throw DataError("unknown formulation \"" + s + "\"");
}

PipelineResult solve_dataset(const ObservationGraph& graph, const SolveOptions& options) {
  PipelineResult out;
  SolveReport& rep = out.report;
  rep.method = to_string(options.method);
  rep.formulation = to_string(options.formulation);

  auto t0 = Clock::now();
  const auto pairs = enumerate_pairs(graph, options.policy);
  const QuadraticForm form = options.formulation == Formulation::Cross
                                 ? build_cross(graph, pairs)
                                 : build_schur(graph, pairs);
  rep.build_seconds = seconds_since(t0);

  t0 = Clock::now();
  std::vector<Mat3> rotations;
  MatX solver_gram;

  switch (options.method) {
    case Method::ConvexIteration: {
      ConvIterResult res = convex_iteration(form, options.conviter);
      rep.rounds = static_cast<int>(res.rounds.size());
      rep.round_records = res.rounds;
      rep.solver_cost = res.objective;
      rep.sdp_objective = res.rounds.empty() ? res.objective : res.rounds.front().f;
      rep.lambda_ratio = res.lambda_ratio;
      rep.spectrum = eigen_tail(res.Z).eigenvalues;
      rep.certificate = check_certificate(form, res.Z, res.certificate);
      rep.has_certificate = true;
      rep.converged = res.last_stats.converged;
      rep.rank_ok = res.rank_ok;
      for (const auto& r : res.rounds) rep.iterations += r.sdp_iterations;
      solver_gram = res.Z;
      rotations = recover_rotations(res.Z, options.conviter.eps_rank, /*force=*/!res.rank_ok);
      break;
    }
    case Method::SdpOnly: {
      RelaxedSolution res = solve_relaxed(form, nullptr, options.conviter.sdp);
      EigenTail tail = eigen_tail(res.Z);
      rep.rounds = 1;
      rep.solver_cost = res.stats.objective;
      rep.sdp_objective = res.stats.objective;
      rep.lambda_ratio = tail.eigenvalues[2] > 0.0 && tail.eigenvalues.size() > 3
                             ? tail.eigenvalues[3] / tail.eigenvalues[2]
                             : 0.0;
      rep.spectrum = tail.eigenvalues;
      rep.certificate = check_certificate(form, res.Z, res.certificate);
      rep.has_certificate = true;
      rep.converged = res.stats.converged;
      rep.rank_ok = rep.lambda_ratio < options.conviter.eps_rank;
      rep.iterations = res.stats.iterations;
      solver_gram = res.Z;
      rotations = recover_rotations(res.Z, options.conviter.eps_rank, /*force=*/true);
      break;
    }
    case Method::Riemannian: {
      LocalSolveResult res =
          riemannian_descent(form, random_rotation_set(graph.robot_count(), options.seed));
      rep.rounds = 0;
      rep.solver_cost = res.cost;
      rep.converged = res.converged;
      rep.iterations = res.iterations;
      rotations = res.rotations;
      solver_gram = gram_from_rotations(rotations);
      rep.spectrum = eigen_tail(solver_gram).eigenvalues;
      rep.lambda_ratio = 0.0;
      rep.rank_ok = true;
      // Re-anchor to robot 1.
      const Mat3 R1 = rotations[0];
      for (auto& R : rotations) R = Mat3(R1.transpose() * R);
      break;
    }
    case Method::Lm: {
      LocalSolveResult res =
          lm_solve(graph, pairs, random_rotation_set(graph.robot_count(), options.seed));
      rep.rounds = 0;
      rep.solver_cost = res.cost;
      rep.converged = res.converged;
      rep.iterations = res.iterations;
      rotations = res.rotations;
      solver_gram = gram_from_rotations(rotations);
      rep.spectrum = eigen_tail(solver_gram).eigenvalues;
      rep.lambda_ratio = 0.0;
      rep.rank_ok = true;
      const Mat3 R1 = rotations[0];
      for (auto& R : rotations) R = Mat3(R1.transpose() * R);
      break;
    }
  }
  rep.solve_seconds = seconds_since(t0);

  t0 = Clock::now();
  TranslationRecovery tr = recover_translations_distances(graph, rotations);
  rep.recovery_seconds = seconds_since(t0);

  out.solution.anchor = 1;
  out.solution.rotations = std::move(rotations);
  out.solution.translations = std::move(tr.translations);
  out.solution.distances = std::move(tr.distances);
  out.solution.residual_rms = tr.residual_rms;
  rep.final_cost = form.evaluate(gram_from_rotations(out.solution.rotations));
  return out;
}

namespace {

using nlohmann::json;

json mat_json(const Mat3& R) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(R(r, c));
  return a;
}

json vecx_json(const VecX& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

std::string solution_to_json(const PoseSolution& solution) {
  json root;
  root["schema"] = 1;
  root["anchor"] = solution.anchor;
  json rots = json::array();
  for (std::size_t i = 0; i < solution.rotations.size(); ++i) {
    rots.push_back({{"id", static_cast<int>(i) + 1}, {"R", mat_json(solution.rotations[i])}});
  }
  root["rotations"] = rots;
  json ts = json::array();
  for (const auto& t : solution.translations) ts.push_back(json::array({t.x(), t.y(), t.z()}));
  root["translations"] = ts;
  root["distances"] = solution.distances;
  root["residual_rms"] = solution.residual_rms;
  return root.dump(2);
}

std::string report_to_json(const SolveReport& report) {
  json root;
  root["schema"] = 1;
  root["method"] = report.method;
  root["formulation"] = report.formulation;
  root["rounds"] = report.rounds;
  json rounds = json::array();
  for (const auto& r : report.round_records) {
    rounds.push_back({{"f", r.f},
                      {"h", r.h},
                      {"alpha", r.alpha},
                      {"spectrum", vecx_json(r.spectrum)},
                      {"sdp_iterations", r.sdp_iterations},
                      {"seconds", r.seconds}});
  }
  root["round_records"] = rounds;
  root["final_cost"] = report.final_cost;
  root["solver_cost"] = report.solver_cost;
  root["sdp_objective"] = report.sdp_objective;
  root["lambda_ratio"] = report.lambda_ratio;
  root["spectrum"] = vecx_json(report.spectrum);
  if (report.has_certificate) {
    root["certificate"] = {{"tau", report.certificate.tau},
                           {"primal_block_error", report.certificate.primal_block_error},
                           {"primal_min_eig", report.certificate.primal_min_eig},
                           {"stationarity", report.certificate.stationarity},
                           {"dual_min_eig", report.certificate.dual_min_eig},
                           {"complementarity", report.certificate.complementarity},
                           {"primal_ok", report.certificate.primal_ok},
                           {"stationarity_ok", report.certificate.stationarity_ok},
                           {"dual_ok", report.certificate.dual_ok},
                           {"complementarity_ok", report.certificate.complementarity_ok}};
  }
  root["converged"] = report.converged;
  root["rank_ok"] = report.rank_ok;
  root["iterations"] = report.iterations;
  root["timings"] = {{"build_s", report.build_seconds},
                     {"solve_s", report.solve_seconds},
                     {"recovery_s", report.recovery_seconds}};
  return root.dump(2);
}

}  // namespace certiloc
