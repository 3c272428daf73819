#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "certiloc/error.hpp"
#include "certiloc/graph.hpp"
#include "test_util.hpp"

using namespace certiloc;

namespace {

ObservationGraph two_robot_graph() {
  ObservationGraph g;
  for (int id = 1; id <= 2; ++id) {
    RobotTrack r;
    r.id = id;
    r.original_id = id;
    for (int k = 0; k < 3; ++k) {
      OdometrySample s;
      s.t = k * 1.0;
      s.R = Mat3::Identity();
      s.p = Vec3(static_cast<double>(k * id), 0.0, 0.0);
      r.odometry.push_back(s);
    }
    g.robots.push_back(r);
  }
  ObservationEdge e;
  e.observer = 1;
  e.observed = 2;
  for (int k = 0; k < 3; ++k) {
    BearingMeasurement m;
    m.t = k * 1.0;
    m.b = Vec3::UnitZ();
    e.measurements.push_back(m);
  }
  g.edges.push_back(e);
  return g;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("validate accepts a synchronized two-robot graph") {
  CHECK(validate(two_robot_graph()).empty());
}

TEST_CASE("validate reports isolated vertices") {
  auto g = two_robot_graph();
  RobotTrack extra;
  extra.id = 3;
  extra.original_id = 3;
  extra.odometry = g.robots[0].odometry;
  g.robots.push_back(extra);
  const auto violations = validate(g);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("isolated vertex") != std::string::npos);
}

TEST_CASE("validate reports non-unit bearings") {
  auto g = two_robot_graph();
  g.edges[0].measurements[1].b = Vec3(0.5, 0.0, 0.0);
  const auto violations = validate(g);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("non-unit bearing") != std::string::npos);
}

TEST_CASE("enumerate_pairs consecutive stride one") {
  const auto g = two_robot_graph();
  const auto pairs = enumerate_pairs(g, PairPolicy::consecutive(1));
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].j1 == 0.0);
  CHECK(pairs[0].j2 == 1.0);
  CHECK(pairs[1].j1 == 1.0);
  CHECK(pairs[1].j2 == 2.0);
}

TEST_CASE("enumerate_pairs all pairs") {
  const auto g = two_robot_graph();
  const auto pairs = enumerate_pairs(g, PairPolicy::all_pairs());
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[1].j1 == 0.0);
  CHECK(pairs[1].j2 == 2.0);
}

TEST_CASE("edge with one measurement yields no pairs") {
  auto g = two_robot_graph();
  g.edges[0].measurements.resize(1);
  CHECK(enumerate_pairs(g, PairPolicy::consecutive(1)).empty());
  CHECK(enumerate_pairs(g, PairPolicy::all_pairs()).empty());
}

TEST_CASE("enumerate_pairs is deterministic and odometry-backed on valid graphs") {
  const auto gen = testutil::instance(4, 21);
  REQUIRE(validate(gen.graph).empty());
  const auto a = enumerate_pairs(gen.graph);
  const auto b = enumerate_pairs(gen.graph);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].edge == b[i].edge);
    CHECK(a[i].j1 == b[i].j1);
    CHECK(a[i].j2 == b[i].j2);
    const auto& e = gen.graph.edges[static_cast<std::size_t>(a[i].edge)];
    CHECK(gen.graph.odometry_at(e.observer, a[i].j1) != nullptr);
    CHECK(gen.graph.odometry_at(e.observed, a[i].j2) != nullptr);
  }
}

TEST_CASE("dataset round-trip is bit exact") {
  const auto gen = testutil::instance(3, 5, 0.01);
  const std::string text = dataset_to_json(gen.graph);
  const ObservationGraph back = dataset_from_json(text);
  CHECK(dataset_to_json(back) == text);

  REQUIRE(back.robots.size() == gen.graph.robots.size());
  for (std::size_t i = 0; i < back.robots.size(); ++i) {
    const auto& ra = gen.graph.robots[i];
    const auto& rb = back.robots[i];
    REQUIRE(ra.odometry.size() == rb.odometry.size());
    for (std::size_t k = 0; k < ra.odometry.size(); ++k) {
      CHECK(ra.odometry[k].t == rb.odometry[k].t);
      CHECK((ra.odometry[k].R - rb.odometry[k].R).norm() == 0.0);
      CHECK((ra.odometry[k].p - rb.odometry[k].p).norm() == 0.0);
    }
  }
  REQUIRE(back.edges.size() == gen.graph.edges.size());
  for (std::size_t i = 0; i < back.edges.size(); ++i) {
    for (std::size_t k = 0; k < back.edges[i].measurements.size(); ++k) {
      CHECK((back.edges[i].measurements[k].b - gen.graph.edges[i].measurements[k].b).norm() ==
            0.0);
    }
  }
  REQUIRE(back.ground_truth.has_value());
}

TEST_CASE("file round-trip through disk") {
  const auto gen = testutil::tiny();
  const std::string path = "roundtrip_test_dataset.json";
  save_dataset(gen.graph, path);
  const ObservationGraph back = load_dataset(path);
  CHECK(dataset_to_json(back) == dataset_to_json(gen.graph));
  std::remove(path.c_str());
}

TEST_CASE("missing robots key is a schema error") {
  CHECK_THROWS_AS(dataset_from_json("{\"edges\": []}"), DataError);
}

TEST_CASE("unknown robot id in edge is an error") {
  auto g = two_robot_graph();
  std::string text = dataset_to_json(g);
  // Point the edge at robot 9 of 2.
  auto pos = text.find("\"observed\":2");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 12, "\"observed\":9");
  CHECK_THROWS_AS(dataset_from_json(text), DataError);
}

TEST_CASE("non-monotone timestamps are an error") {
  auto g = two_robot_graph();
  g.robots[0].odometry[1].t = 5.0;  // sequence 0, 5, 2
  CHECK_THROWS_AS(dataset_from_json(dataset_to_json(g)), DataError);
}

TEST_CASE("robot labels are normalized to 1..N keeping originals") {
  auto src = two_robot_graph();
  src.robots[0].original_id = 20;
  src.robots[1].original_id = 10;
  const std::string text = dataset_to_json(src);
  CHECK(text.find("\"observer\":20") != std::string::npos);
  CHECK(text.find("\"observed\":10") != std::string::npos);

  const auto g = dataset_from_json(text);
  REQUIRE(g.robot_count() == 2);
  // Labels sorted ascending: 10 -> 1, 20 -> 2.
  CHECK(g.robots[0].id == 1);
  CHECK(g.robots[0].original_id == 10);
  CHECK(g.robots[1].original_id == 20);
  CHECK(g.edges[0].observer == 2);
  CHECK(g.edges[0].observed == 1);
  // Original labels survive re-serialization; once normalized (robots sorted
  // by label) the round trip is bit-exact.
  const std::string canonical = dataset_to_json(g);
  CHECK(canonical.find("\"observer\":20") != std::string::npos);
  CHECK(dataset_to_json(dataset_from_json(canonical)) == canonical);
}

}  // TEST_SUITE
