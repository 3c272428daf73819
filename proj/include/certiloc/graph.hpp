#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "certiloc/so3.hpp"

namespace certiloc {

// One odometry pose of a robot in its own local world frame (the frame of its
// first pose in the synthetic protocol).
struct OdometrySample {
  double t = 0.0;
  Mat3 R = Mat3::Identity();  // body -> local world
  Vec3 p = Vec3::Zero();      // meters, local world
};

// One unit bearing toward the observed robot, in the observer body frame at t.
struct BearingMeasurement {
  double t = 0.0;
  Vec3 b = Vec3::UnitX();
};

struct RobotTrack {
  int id = 0;           // normalized, 1..N
  int original_id = 0;  // label found in the source file
  std::vector<OdometrySample> odometry;
};

// Directed edge: `observer` sees `observed` at the listed timestamps.
struct ObservationEdge {
  int observer = 0;
  int observed = 0;
  std::vector<BearingMeasurement> measurements;
};

struct GroundTruthPose {
  int id = 0;
  Mat3 R = Mat3::Identity();  // local world -> global world
  Vec3 p = Vec3::Zero();
};

// The problem input: robots with synchronized odometry plus directed
// bearing-edge measurement sets. Immutable after construction; share freely
// across threads.
struct ObservationGraph {
  std::vector<RobotTrack> robots;
  std::vector<ObservationEdge> edges;
  std::optional<std::vector<GroundTruthPose>> ground_truth;

  int robot_count() const { return static_cast<int>(robots.size()); }

  const RobotTrack& robot(int id) const { return robots.at(id - 1); }

  // Exact-timestamp lookup (odometry is time sorted). Returns nullptr when the
  // stamp is absent.
  const OdometrySample* odometry_at(int robot_id, double t) const;
};

// A two-timestamp index into one edge, j1 < j2.
struct PairIndex {
  int edge = 0;  // index into graph.edges
  double j1 = 0.0;
  double j2 = 0.0;
};

struct PairPolicy {
  enum class Kind { Consecutive, AllPairs };
  Kind kind = Kind::Consecutive;
  int stride = 1;

  static PairPolicy consecutive(int stride = 1) { return {Kind::Consecutive, stride}; }
  static PairPolicy all_pairs() { return {Kind::AllPairs, 0}; }
};

// Report-style invariant check; empty result means the graph is well formed
// and has no isolated vertex.
std::vector<std::string> validate(const ObservationGraph& graph);

// Deterministic pair enumeration per edge. Edges with fewer than two
// measurements contribute nothing.
std::vector<PairIndex> enumerate_pairs(const ObservationGraph& graph,
                                       const PairPolicy& policy = PairPolicy::consecutive());

// True when every robot is reachable from every other in the undirected view.
bool weakly_connected(const ObservationGraph& graph);

// Canonical JSON dataset IO. Round trips are bit exact. Throws DataError on
// schema violations, non-monotone timestamps, or unknown robot ids.
ObservationGraph load_dataset(const std::string& path);
void save_dataset(const ObservationGraph& graph, const std::string& path);
ObservationGraph dataset_from_json(const std::string& text);
std::string dataset_to_json(const ObservationGraph& graph);

}  // namespace certiloc
