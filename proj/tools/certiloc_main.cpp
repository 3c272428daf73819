#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "certiloc/bench.hpp"
#include "certiloc/error.hpp"
#include "certiloc/pipeline.hpp"
#include "certiloc/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw certiloc::DataError("cannot write " + path.string());
  out << text;
}

json config_json(const certiloc::GenConfig& c) {
  return {{"name", c.name},
          {"robots", c.robots},
          {"timesteps", c.timesteps},
          {"world_size", c.world_size},
          {"seg_min", c.seg_min},
          {"seg_max", c.seg_max},
          {"max_turn_deg", c.max_turn_deg},
          {"sigma_bearing", c.sigma_bearing},
          {"edge_density", c.edge_density},
          {"seed", c.seed},
          {"ensure_connected", c.ensure_connected}};
}

int cmd_generate(const std::string& suite, int n, int timesteps, double sigma, double density,
                 std::uint64_t seed, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<certiloc::GenConfig> configs;
  if (!suite.empty()) {
    configs = certiloc::make_suite(suite);
  } else {
    certiloc::GenConfig c;
    c.robots = n;
    c.timesteps = timesteps;
    c.sigma_bearing = sigma;
    c.edge_density = density;
    c.seed = seed;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "dataset_N%d_sig%.3f_seed%llu", n, sigma,
                  static_cast<unsigned long long>(seed));
    c.name = buf;
    configs.push_back(c);
  }

  json meta;
  meta["schema"] = 1;
  meta["suite"] = suite;
  json entries = json::array();
  for (const auto& c : configs) {
    certiloc::Generated gen = certiloc::generate(c);
    const fs::path path = fs::path(out_dir) / (c.name + ".json");
    certiloc::save_dataset(gen.graph, path.string());
    json entry = config_json(c);
    entry["file"] = path.filename().string();
    entry["repair_log"] = gen.repair_log;
    entries.push_back(entry);
    std::cout << path.string() << "\n";
  }
  meta["datasets"] = entries;
  write_file(fs::path(out_dir) / "meta.json", meta.dump(2) + "\n");
  std::cout << configs.size() << " dataset(s) written to " << out_dir << "\n";
  return 0;
}

int cmd_solve(const std::string& dataset, const std::string& formulation,
              const std::string& method, const std::string& pair_policy, std::uint64_t seed,
              const std::string& out_dir) {
  const certiloc::ObservationGraph graph = certiloc::load_dataset(dataset);
  const auto violations = certiloc::validate(graph);
  if (!violations.empty()) {
    std::string msg = "dataset failed validation:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw certiloc::DataError(msg);
  }

  certiloc::SolveOptions opts;
  opts.formulation = certiloc::formulation_from_string(formulation);
  opts.method = certiloc::method_from_string(method);
  opts.seed = seed;
  if (pair_policy == "all") {
    opts.policy = certiloc::PairPolicy::all_pairs();
  } else if (pair_policy.rfind("consecutive", 0) == 0) {
    int stride = 1;
    const auto colon = pair_policy.find(':');
    if (colon != std::string::npos) stride = std::stoi(pair_policy.substr(colon + 1));
    if (stride < 1) throw certiloc::DataError("pair policy stride must be >= 1");
    opts.policy = certiloc::PairPolicy::consecutive(stride);
  } else {
    throw certiloc::DataError("unknown pair policy \"" + pair_policy + "\"");
  }

  const certiloc::PipelineResult res = certiloc::solve_dataset(graph, opts);
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "solution.json", certiloc::solution_to_json(res.solution) + "\n");
  write_file(fs::path(out_dir) / "report.json", certiloc::report_to_json(res.report) + "\n");

  std::cout << "method=" << res.report.method << " formulation=" << res.report.formulation
            << " rounds=" << res.report.rounds << " cost=" << res.report.final_cost
            << " lambda4/lambda3=" << res.report.lambda_ratio << "\n"
            << "solution.json and report.json written to " << out_dir << "\n";
  return 0;
}

int cmd_bench(const std::string& suite, const std::string& data_dir,
              const std::string& methods_csv, const std::string& formulation,
              const std::string& out_dir, int threads) {
  const auto configs = certiloc::make_suite(suite);

  certiloc::BenchOptions options;
  options.formulation = certiloc::formulation_from_string(formulation);
  options.threads = threads;
  options.methods.clear();
  std::stringstream ss(methods_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) options.methods.push_back(certiloc::method_from_string(tok));
  }
  if (options.methods.empty()) throw certiloc::DataError("no methods selected");

  std::vector<certiloc::BenchDataset> datasets;
  datasets.reserve(configs.size());
  for (const auto& c : configs) {
    const fs::path path = fs::path(data_dir) / (c.name + ".json");
    if (!fs::exists(path)) {
      throw certiloc::DataError("missing dataset " + path.string() +
                                " (run `certiloc generate --suite " + suite + "` first)");
    }
    datasets.push_back({c, certiloc::load_dataset(path.string())});
  }

  const auto records = certiloc::bench_suite(suite, datasets, options);
  fs::create_directories(out_dir);
  const fs::path runs = fs::path(out_dir) / (suite + "_runs.csv");
  const fs::path agg = fs::path(out_dir) / (suite + "_aggregate.csv");
  write_file(runs, certiloc::records_to_csv(records));
  write_file(agg, certiloc::aggregate_to_csv(records));
  std::cout << records.size() << " runs -> " << runs.string() << "\n"
            << "aggregate -> " << agg.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certiloc: certifiable mutual localization from bearings and odometry"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write synthetic datasets");
  std::string gen_suite, gen_out = "runs";
  int gen_n = 4, gen_m = 10;
  double gen_sigma = 0.0, gen_density = 0.5;
  std::uint64_t gen_seed = 0;
  gen->add_option("--suite", gen_suite, "Suite name: optimality | noise | runtime");
  gen->add_option("--n", gen_n, "Robot count")->check(CLI::Range(2, 64));
  gen->add_option("--timesteps", gen_m, "Timesteps per trajectory")->check(CLI::Range(2, 100000));
  gen->add_option("--sigma", gen_sigma, "Bearing noise std (radians)")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--density", gen_density, "Directed edge density in (0, 1]")
      ->check(CLI::Range(1e-6, 1.0));
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "Output directory");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one dataset");
  std::string solve_dataset_path, solve_form = "cross", solve_method = "conviter";
  std::string solve_policy = "consecutive:1", solve_out = ".";
  std::uint64_t solve_seed = 0;
  solve->add_option("dataset", solve_dataset_path, "Dataset JSON path")->required();
  solve->add_option("--formulation", solve_form, "cross | schur");
  solve->add_option("--method", solve_method, "conviter | sdp | riem | lm");
  solve->add_option("--pair-policy", solve_policy, "consecutive:K | all");
  solve->add_option("--seed", solve_seed, "Initializer seed for riem/lm");
  solve->add_option("--out", solve_out, "Output directory");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
  std::string bench_suite_name, bench_data = "runs", bench_out = "runs";
  std::string bench_methods = "conviter,sdp,riem,lm", bench_form = "cross";
  int bench_threads = 0;
  bench->add_option("--suite", bench_suite_name, "optimality | noise | runtime")->required();
  bench->add_option("--data", bench_data, "Directory with generated datasets");
  bench->add_option("--methods", bench_methods, "Comma-separated method list");
  bench->add_option("--formulation", bench_form, "cross | schur");
  bench->add_option("--out", bench_out, "Output directory for CSV files");
  bench->add_option("--threads", bench_threads, "Worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      return cmd_generate(gen_suite, gen_n, gen_m, gen_sigma, gen_density, gen_seed, gen_out);
    }
    if (solve->parsed()) {
      return cmd_solve(solve_dataset_path, solve_form, solve_method, solve_policy, solve_seed,
                       solve_out);
    }
    if (bench->parsed()) {
      return cmd_bench(bench_suite_name, bench_data, bench_methods, bench_form, bench_out,
                       bench_threads);
    }
  } catch (const certiloc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const certiloc::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}
