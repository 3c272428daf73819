#include <fstream>
#include <map>

#include <json.hpp>

#include "certiloc/error.hpp"
#include "certiloc/graph.hpp"

namespace certiloc {

namespace {

using nlohmann::json;

json mat_to_json(const Mat3& R) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(R(r, c));  // row-major
  return a;
}

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Mat3 mat_from_json(const json& a) {
  if (!a.is_array() || a.size() != 9) throw DataError("expected 9-element row-major matrix");
  Mat3 R;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R(r, c) = a.at(static_cast<std::size_t>(3 * r + c)).get<double>();
  return R;
}

Vec3 vec_from_json(const json& a) {
  if (!a.is_array() || a.size() != 3) throw DataError("expected 3-element vector");
  return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>());
}

}  // namespace

std::string dataset_to_json(const ObservationGraph& graph) {
  // Files carry the original labels throughout.
  auto label = [&](int id) {
    const auto& r = graph.robots.at(static_cast<std::size_t>(id - 1));
    return r.original_id != 0 ? r.original_id : r.id;
  };

  json root;
  json robots = json::array();
  for (const auto& r : graph.robots) {
    json odom = json::array();
    for (const auto& s : r.odometry) {
      odom.push_back({{"t", s.t}, {"R", mat_to_json(s.R)}, {"p", vec_to_json(s.p)}});
    }
    robots.push_back({{"id", label(r.id)}, {"odometry", odom}});
  }
  root["robots"] = robots;

  json edges = json::array();
  for (const auto& e : graph.edges) {
    json meas = json::array();
    for (const auto& m : e.measurements) {
      meas.push_back({{"t", m.t}, {"b", vec_to_json(m.b)}});
    }
    edges.push_back({{"observer", label(e.observer)}, {"observed", label(e.observed)},
                     {"meas", meas}});
  }
  root["edges"] = edges;

  if (graph.ground_truth) {
    json poses = json::array();
    for (const auto& g : *graph.ground_truth) {
      poses.push_back({{"id", label(g.id)}, {"R", mat_to_json(g.R)}, {"p", vec_to_json(g.p)}});
    }
    root["ground_truth"] = {{"poses", poses}};
  }
  return root.dump();
}

ObservationGraph dataset_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("robots") || !root.contains("edges")) {
    throw DataError("schema error: missing \"robots\" or \"edges\"");
  }

  ObservationGraph graph;
  try {
    std::map<int, RobotTrack> by_label;  // sorted original labels -> 1..N
    for (const auto& jr : root.at("robots")) {
      RobotTrack track;
      track.original_id = jr.at("id").get<int>();
      for (const auto& js : jr.at("odometry")) {
        OdometrySample s;
        s.t = js.at("t").get<double>();
        s.R = mat_from_json(js.at("R"));
        s.p = vec_from_json(js.at("p"));
        if (!track.odometry.empty() && !(track.odometry.back().t < s.t)) {
          throw DataError("non-monotone odometry timestamps for robot id " +
                          std::to_string(track.original_id));
        }
        track.odometry.push_back(s);
      }
      if (!by_label.emplace(track.original_id, std::move(track)).second) {
        throw DataError("duplicate robot id " + std::to_string(track.original_id));
      }
    }
    std::map<int, int> remap;
    for (auto& [label, track] : by_label) {
      track.id = static_cast<int>(graph.robots.size()) + 1;
      remap[label] = track.id;
      graph.robots.push_back(std::move(track));
    }

    auto lookup = [&](int label) {
      auto it = remap.find(label);
      if (it == remap.end()) {
        throw DataError("unknown robot id " + std::to_string(label));
      }
      return it->second;
    };

    for (const auto& je : root.at("edges")) {
      ObservationEdge e;
      e.observer = lookup(je.at("observer").get<int>());
      e.observed = lookup(je.at("observed").get<int>());
      for (const auto& jm : je.at("meas")) {
        BearingMeasurement m;
        m.t = jm.at("t").get<double>();
        m.b = vec_from_json(jm.at("b"));
        if (!e.measurements.empty() && !(e.measurements.back().t < m.t)) {
          throw DataError("non-monotone measurement timestamps on edge " +
                          std::to_string(e.observer) + "->" + std::to_string(e.observed));
        }
        e.measurements.push_back(m);
      }
      graph.edges.push_back(std::move(e));
    }

    if (root.contains("ground_truth")) {
      std::vector<GroundTruthPose> poses;
      for (const auto& jp : root.at("ground_truth").at("poses")) {
        GroundTruthPose g;
        g.id = lookup(jp.at("id").get<int>());
        g.R = mat_from_json(jp.at("R"));
        g.p = vec_from_json(jp.at("p"));
        poses.push_back(g);
      }
      std::sort(poses.begin(), poses.end(),
                [](const GroundTruthPose& a, const GroundTruthPose& b) { return a.id < b.id; });
      graph.ground_truth = std::move(poses);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("schema error: ") + e.what());
  }
  return graph;
}

ObservationGraph load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return dataset_from_json(text);
}

void save_dataset(const ObservationGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset: " + path);
  out << dataset_to_json(graph);
  out << '\n';
}

}  // namespace certiloc
