#include "certiloc/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "certiloc/form_cross.hpp"
#include "certiloc/form_schur.hpp"

namespace certiloc {

int effective_thread_count(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("CERTILOC_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0 && cap < n) n = cap;
  }
  return n;
}

namespace {

RunRecord run_one(const std::string& suite, const BenchDataset& ds, Method method,
                  const BenchOptions& options) {
  RunRecord rec;
  rec.suite = suite;
  rec.name = ds.config.name;
  rec.N = ds.config.robots;
  rec.sigma = ds.config.sigma_bearing;
  rec.seed = ds.config.seed;
  rec.method = to_string(method);
  rec.formulation = to_string(options.formulation);

  const auto t0 = std::chrono::steady_clock::now();
  try {
    SolveOptions opts;
    opts.formulation = options.formulation;
    opts.method = method;
    opts.policy = options.policy;
    opts.seed = ds.config.seed + 77;  // local-method initializer stream

    PipelineResult res = solve_dataset(ds.graph, opts);
    rec.cost = res.report.final_cost;
    rec.solver_cost = res.report.solver_cost;
    rec.sdp_lower_bound = res.report.sdp_objective;
    rec.lambda_ratio = res.report.lambda_ratio;
    rec.rounds = res.report.rounds;
    rec.iterations = res.report.iterations;
    rec.rank_ok = res.report.rank_ok;
    rec.converged = res.report.converged;
    rec.cert_ok = res.report.has_certificate && res.report.certificate.all_ok();

    const auto pairs = enumerate_pairs(ds.graph, options.policy);
    const QuadraticForm form = options.formulation == Formulation::Cross
                                   ? build_cross(ds.graph, pairs)
                                   : build_schur(ds.graph, pairs);
    rec.form_scale = form.scale();
    if (ds.graph.ground_truth) {
      rec.cost_at_gt = form.evaluate(ground_truth_gram(*ds.graph.ground_truth));
      const PoseErrors err = pose_errors(res.solution, *ds.graph.ground_truth);
      rec.rot_err_max = err.max_rotation_error;
      rec.rot_err_mean = err.mean_rotation_error;
      rec.trans_rmse = err.translation_rmse;
    }
  } catch (const std::exception& e) {
    rec.status = e.what();
  }
  rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<RunRecord> bench_suite(const std::string& suite,
                                   const std::vector<BenchDataset>& datasets,
                                   const BenchOptions& options) {
  const int n_methods = static_cast<int>(options.methods.size());
  const int n_jobs = static_cast<int>(datasets.size()) * n_methods;
  std::vector<RunRecord> records(static_cast<std::size_t>(n_jobs));

  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int job = next.fetch_add(1);
      if (job >= n_jobs) break;
      const int di = job / n_methods;
      const int mi = job % n_methods;
      records[static_cast<std::size_t>(job)] =
          run_one(suite, datasets[static_cast<std::size_t>(di)],
                  options.methods[static_cast<std::size_t>(mi)], options);
    }
  };

  const int n_threads = effective_thread_count(options.threads);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Per-dataset optimality flags against the best returned cost.
  for (int di = 0; di < static_cast<int>(datasets.size()); ++di) {
    double best = 0.0;
    bool have = false;
    for (int mi = 0; mi < n_methods; ++mi) {
      const auto& r = records[static_cast<std::size_t>(di * n_methods + mi)];
      if (r.status != "ok") continue;
      if (!have || r.cost < best) {
        best = r.cost;
        have = true;
      }
    }
    for (int mi = 0; mi < n_methods; ++mi) {
      auto& r = records[static_cast<std::size_t>(di * n_methods + mi)];
      r.optimal = have && r.status == "ok" && r.cost <= best + 1e-6 * (1.0 + r.form_scale);
    }
  }
  return records;
}

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << "suite,name,N,sigma,seed,method,formulation,cost,solver_cost,sdp_lower_bound,"
        "cost_at_gt,form_scale,lambda_ratio,rot_err_max_rad,rot_err_mean_rad,trans_rmse_m,"
        "rounds,iterations,rank_ok,converged,cert_ok,optimal,status,wall_s\n";
  for (const auto& r : records) {
    os << r.suite << ',' << r.name << ',' << r.N << ',' << fmt(r.sigma) << ',' << r.seed << ','
       << r.method << ',' << r.formulation << ',' << fmt(r.cost) << ',' << fmt(r.solver_cost)
       << ',' << fmt(r.sdp_lower_bound) << ',' << fmt(r.cost_at_gt) << ',' << fmt(r.form_scale)
       << ',' << fmt(r.lambda_ratio) << ',' << fmt(r.rot_err_max) << ',' << fmt(r.rot_err_mean)
       << ',' << fmt(r.trans_rmse) << ',' << r.rounds << ',' << r.iterations << ','
       << (r.rank_ok ? 1 : 0) << ',' << (r.converged ? 1 : 0) << ',' << (r.cert_ok ? 1 : 0)
       << ',' << (r.optimal ? 1 : 0) << ',' << (r.status == "ok" ? "ok" : "error") << ','
       << fmt(r.wall_s) << '\n';
  }
  return os.str();
}

std::string aggregate_to_csv(const std::vector<RunRecord>& records) {
  struct Key {
    std::string suite;
    int N;
    double sigma;
    std::string method;
    bool operator<(const Key& o) const {
      return std::tie(suite, N, sigma, method) < std::tie(o.suite, o.N, o.sigma, o.method);
    }
  };
  struct Acc {
    int runs = 0;
    int optimal = 0;
    double cost_sum = 0.0, cost_sq = 0.0;
    double wall_sum = 0.0, wall_sq = 0.0;
    double rot_sum = 0.0;
  };
  std::map<Key, Acc> acc;
  for (const auto& r : records) {
    if (r.status != "ok") continue;
    auto& a = acc[{r.suite, r.N, r.sigma, r.method}];
    ++a.runs;
    a.optimal += r.optimal ? 1 : 0;
    a.cost_sum += r.cost;
    a.cost_sq += r.cost * r.cost;
    a.wall_sum += r.wall_s;
    a.wall_sq += r.wall_s * r.wall_s;
    a.rot_sum += r.rot_err_mean;
  }

  std::ostringstream os;
  os << "suite,N,sigma,method,runs,optimal_rate,mean_cost,std_cost,mean_rot_err_rad,"
        "mean_wall_s,std_wall_s\n";
  for (const auto& [key, a] : acc) {
    const double n = a.runs;
    const double mean_cost = a.cost_sum / n;
    const double var_cost = std::max(0.0, a.cost_sq / n - mean_cost * mean_cost);
    const double mean_wall = a.wall_sum / n;
    const double var_wall = std::max(0.0, a.wall_sq / n - mean_wall * mean_wall);
    os << key.suite << ',' << key.N << ',' << fmt(key.sigma) << ',' << key.method << ','
       << a.runs << ',' << fmt(a.optimal / n) << ',' << fmt(mean_cost) << ','
       << fmt(std::sqrt(var_cost)) << ',' << fmt(a.rot_sum / n) << ',' << fmt(mean_wall) << ','
       << fmt(std::sqrt(var_wall)) << '\n';
  }
  return os.str();
}

}  // namespace certiloc
