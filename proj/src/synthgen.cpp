#include "certiloc/synthgen.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>

#include "certiloc/error.hpp"
#include "certiloc/quadratic_form.hpp"
#include "certiloc/rng.hpp"

namespace certiloc {

namespace {

constexpr double kMinSeparation = 0.5;  // meters, robots never closer than this
constexpr double kTimeStep = 0.1;       // seconds on the common grid

Vec3 random_unit(Rng& rng) {
  while (true) {
    const Vec3 v(rng.gaussian(), rng.gaussian(), rng.gaussian());
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Mat3 random_rotation(Rng& rng) {
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
  return quat_to_rot(q[0] * inv, q[1] * inv, q[2] * inv, q[3] * inv);
}

// Rotate `dir` by a random angle in [0, max_turn] about a random axis.
Vec3 turned(Rng& rng, const Vec3& dir, double max_turn) {
  const Vec3 axis = random_unit(rng);
  const double angle = rng.uniform(0.0, max_turn);
  return exp_so3(axis * angle) * dir;
}

}  // namespace

Generated generate(const GenConfig& config) {
  if (!config.valid()) throw DataError("generate: invalid config");
  Rng rng(config.seed);

  const int N = config.robots;
  const int m = config.timesteps;
  const double half = 0.5 * config.world_size;
  const double max_turn = config.max_turn_deg * M_PI / 180.0;

  // World-frame trajectories on a common time grid.
  std::vector<std::vector<Vec3>> pos(static_cast<std::size_t>(N));
  std::vector<std::vector<Mat3>> rot(static_cast<std::size_t>(N));
  std::vector<Vec3> heading(static_cast<std::size_t>(N));

  auto far_enough = [&](int robot, int t, const Vec3& candidate) {
    for (int other = 0; other < robot; ++other) {
      if ((pos[static_cast<std::size_t>(other)][static_cast<std::size_t>(t)] - candidate)
              .norm() < kMinSeparation) {
        return false;
      }
    }
    return true;
  };

  for (int i = 0; i < N; ++i) {
    auto& p = pos[static_cast<std::size_t>(i)];
    auto& R = rot[static_cast<std::size_t>(i)];
    p.resize(static_cast<std::size_t>(m));
    R.resize(static_cast<std::size_t>(m));

    Vec3 start;
    for (int attempt = 0;; ++attempt) {
      start = Vec3(rng.uniform(-half * 0.8, half * 0.8), rng.uniform(-half * 0.8, half * 0.8),
                   rng.uniform(-half * 0.8, half * 0.8));
      if (far_enough(i, 0, start) || attempt > 200) break;
    }
    p[0] = start;
    R[0] = random_rotation(rng);
    heading[static_cast<std::size_t>(i)] = random_unit(rng);

    for (int t = 1; t < m; ++t) {
      Vec3 dir = heading[static_cast<std::size_t>(i)];
      Vec3 cand;
      bool placed = false;
      for (int attempt = 0; attempt < 50; ++attempt) {
        const Vec3 trial_dir = turned(rng, dir, max_turn);
        const double len = rng.uniform(config.seg_min, config.seg_max);
        Vec3 c = p[static_cast<std::size_t>(t - 1)] + len * trial_dir;
        // Steer back toward the middle instead of leaving the box.
        if (c.cwiseAbs().maxCoeff() > half) {
          const Vec3 inward = (-p[static_cast<std::size_t>(t - 1)]).normalized();
          c = p[static_cast<std::size_t>(t - 1)] + len * turned(rng, inward, max_turn * 0.5);
        }
        if (far_enough(i, t, c)) {
          cand = c;
          dir = (c - p[static_cast<std::size_t>(t - 1)]).normalized();
          placed = true;
          break;
        }
      }
      if (!placed) {
        // Step straight away from the nearest neighbor.
        Vec3 away = Vec3::UnitX();
        double best = 1e300;
        for (int other = 0; other < i; ++other) {
          const Vec3 diff = p[static_cast<std::size_t>(t - 1)] -
                            pos[static_cast<std::size_t>(other)][static_cast<std::size_t>(t)];
          if (diff.norm() < best) {
            best = diff.norm();
            away = diff.norm() > 1e-9 ? diff.normalized() : random_unit(rng);
          }
        }
        cand = p[static_cast<std::size_t>(t - 1)] + config.seg_max * away;
        dir = away;
      }
      p[static_cast<std::size_t>(t)] = cand;
      heading[static_cast<std::size_t>(i)] = dir;
      // Smooth orientation walk, decoupled from the heading.
      R[static_cast<std::size_t>(t)] =
          R[static_cast<std::size_t>(t - 1)] * exp_so3(random_unit(rng) * rng.uniform(0.0, 0.2));
    }
  }

  // Directed edges per ordered pair, then repair.
  std::set<std::pair<int, int>> edge_set;
  for (int i = 1; i <= N; ++i) {
    for (int j = 1; j <= N; ++j) {
      if (i == j) continue;
      if (rng.uniform() < config.edge_density) edge_set.insert({i, j});
    }
  }

  Generated out;
  if (config.ensure_connected) {
    auto touched = [&](int v) {
      for (const auto& [a, b] : edge_set) {
        if (a == v || b == v) return true;
      }
      return false;
    };
    for (int v = 1; v <= N; ++v) {
      if (!touched(v)) {
        int w = v;
        while (w == v) w = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(N)));
        edge_set.insert({v, w});
        out.repair_log.push_back("added edge " + std::to_string(v) + "->" + std::to_string(w) +
                                 " (isolated vertex repair)");
      }
    }
    // Union-find over the undirected view for weak connectivity.
    std::vector<int> parent(static_cast<std::size_t>(N + 1));
    for (int v = 1; v <= N; ++v) parent[static_cast<std::size_t>(v)] = v;
    std::function<int(int)> find = [&](int v) {
      while (parent[static_cast<std::size_t>(v)] != v) {
        parent[static_cast<std::size_t>(v)] =
            parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
        v = parent[static_cast<std::size_t>(v)];
      }
      return v;
    };
    auto unite = [&](int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); };
    for (const auto& [a, b] : edge_set) unite(a, b);
    for (int v = 2; v <= N; ++v) {
      if (find(v) != find(1)) {
        edge_set.insert({1, v});
        unite(1, v);
        out.repair_log.push_back("added edge 1->" + std::to_string(v) +
                                 " (connectivity repair)");
      }
    }
  }

  // Assemble the graph in each robot's first-pose frame.
  ObservationGraph& graph = out.graph;
  for (int i = 1; i <= N; ++i) {
    RobotTrack track;
    track.id = i;
    track.original_id = i;
    const Mat3& R0 = rot[static_cast<std::size_t>(i - 1)][0];
    const Vec3& p0 = pos[static_cast<std::size_t>(i - 1)][0];
    for (int t = 0; t < m; ++t) {
      OdometrySample s;
      s.t = t * kTimeStep;
      s.R = R0.transpose() * rot[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(t)];
      s.p = R0.transpose() *
            (pos[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(t)] - p0);
      track.odometry.push_back(s);
    }
    graph.robots.push_back(std::move(track));

    GroundTruthPose g;
    g.id = i;
    g.R = R0;
    g.p = p0;
    out.truth.poses.push_back(g);
  }

  for (const auto& [obs, tgt] : edge_set) {
    ObservationEdge edge;
    edge.observer = obs;
    edge.observed = tgt;
    std::vector<double> dists;
    for (int t = 0; t < m; ++t) {
      const Vec3 diff = pos[static_cast<std::size_t>(tgt - 1)][static_cast<std::size_t>(t)] -
                        pos[static_cast<std::size_t>(obs - 1)][static_cast<std::size_t>(t)];
      const double dist = diff.norm();
      Vec3 b = rot[static_cast<std::size_t>(obs - 1)][static_cast<std::size_t>(t)].transpose() *
               (diff / dist);
      if (config.sigma_bearing > 0.0) {
        // Tangent-plane Gaussian, then renormalize.
        const Vec3 ref = std::abs(b.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
        const Vec3 u = b.cross(ref).normalized();
        const Vec3 v = b.cross(u);
        b = (b + config.sigma_bearing * (rng.gaussian() * u + rng.gaussian() * v)).normalized();
      }
      BearingMeasurement meas;
      meas.t = t * kTimeStep;
      meas.b = b;
      edge.measurements.push_back(meas);
      dists.push_back(dist);
    }
    graph.edges.push_back(std::move(edge));
    out.truth.distances.push_back(std::move(dists));
  }

  graph.ground_truth = out.truth.poses;
  return out;
}

std::vector<GenConfig> make_suite(const std::string& name) {
  std::vector<GenConfig> configs;
  auto add = [&](int N, double sigma, int trials, int m, std::uint64_t seed_base) {
    for (int trial = 0; trial < trials; ++trial) {
      GenConfig c;
      c.robots = N;
      c.timesteps = m;
      c.sigma_bearing = sigma;
      c.edge_density = 0.5;
      c.seed = seed_base + static_cast<std::uint64_t>(trial);
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%s_N%d_sig%.3f_t%03d", name.c_str(), N, sigma, trial);
      c.name = buf;
      configs.push_back(c);
    }
  };

  if (name == "optimality") {
    for (int N = 2; N <= 8; ++N) add(N, 0.0, 100, 10, 1000ull * static_cast<std::uint64_t>(N));
  } else if (name == "noise") {
    const double sigmas[] = {0.0, 0.005, 0.01, 0.02, 0.05};
    int idx = 0;
    for (double s : sigmas) add(5, s, 100, 10, 50000ull + 1000ull * static_cast<std::uint64_t>(idx++));
  } else if (name == "runtime") {
    for (int N = 2; N <= 10; ++N) add(N, 0.01, 20, 50, 90000ull + 1000ull * static_cast<std::uint64_t>(N));
  } else {
    throw DataError("make_suite: unknown suite \"" + name + "\"");
  }
  return configs;
}

MatX ground_truth_gram(const std::vector<GroundTruthPose>& poses) {
  std::vector<Mat3> R;
  R.reserve(poses.size());
  for (const auto& g : poses) R.push_back(g.R);
  return gram_from_rotations(R);
}

}  // namespace certiloc
