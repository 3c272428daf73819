#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "certiloc/graph.hpp"
#include "certiloc/quadratic_form.hpp"

namespace certiloc {

struct GenConfig {
  int robots = 2;
  int timesteps = 10;
  double world_size = 20.0;    // box side, meters
  double seg_min = 0.5;        // step length bounds, meters
  double seg_max = 2.0;
  double max_turn_deg = 30.0;  // heading change per step
  double sigma_bearing = 0.0;  // tangent-plane Gaussian std, radians
  double edge_density = 0.5;   // probability per ordered pair
  std::uint64_t seed = 0;
  bool ensure_connected = true;  // repair to no-isolated-vertex + weak connectivity
  std::string name;

  bool valid() const {
    return robots >= 2 && timesteps >= 2 && sigma_bearing >= 0.0 && edge_density > 0.0 &&
           edge_density <= 1.0 && seg_min > 0.0 && seg_max >= seg_min;
  }
};

struct GroundTruth {
  std::vector<GroundTruthPose> poses;          // local world -> global world
  std::vector<std::vector<double>> distances;  // per edge, per measurement
};

struct Generated {
  ObservationGraph graph;  // carries ground_truth poses as well
  GroundTruth truth;
  std::vector<std::string> repair_log;
};

// Samples world trajectories, re-expresses odometry in each robot's
// first-pose frame, draws the directed observation graph, and emits noised
// bearings. Deterministic per config. Throws DataError on invalid configs.
Generated generate(const GenConfig& config);

// Experiment grids: "optimality" (N 2..8, sigma 0, 100 seeds),
// "noise" (N = 5, sigma in {0, 0.005, 0.01, 0.02, 0.05} rad, 100 seeds),
// "runtime" (N 2..10, sigma 0.01, 20 seeds). Throws DataError on unknown
// names.
std::vector<GenConfig> make_suite(const std::string& name);

// Ground-truth Gram matrix R~^T R~ from stored poses.
MatX ground_truth_gram(const std::vector<GroundTruthPose>& poses);

}  // namespace certiloc
