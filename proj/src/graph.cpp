#include "certiloc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace certiloc {

const OdometrySample* ObservationGraph::odometry_at(int robot_id, double t) const {
  if (robot_id < 1 || robot_id > robot_count()) return nullptr;
  const auto& odom = robots[robot_id - 1].odometry;
  auto it = std::lower_bound(odom.begin(), odom.end(), t,
                             [](const OdometrySample& s, double v) { return s.t < v; });
  if (it == odom.end() || it->t != t) return nullptr;
  return &*it;
}

namespace {

std::string describe(int edge_idx, const ObservationEdge& e) {
  std::ostringstream os;
  os << "edge[" << edge_idx << "] " << e.observer << "->" << e.observed;
  return os.str();
}

}  // namespace

std::vector<std::string> validate(const ObservationGraph& graph) {
  std::vector<std::string> out;
  const int n = graph.robot_count();

  for (int i = 0; i < n; ++i) {
    const auto& r = graph.robots[i];
    if (r.id != i + 1) {
      out.push_back("robot ids not contiguous 1..N at position " + std::to_string(i));
    }
    for (std::size_t k = 0; k < r.odometry.size(); ++k) {
      const auto& s = r.odometry[k];
      if (!is_rotation(s.R)) {
        out.push_back("robot " + std::to_string(r.id) + ": odometry rotation at t=" +
                      std::to_string(s.t) + " not in SO(3)");
      }
      if (k > 0 && !(r.odometry[k - 1].t < s.t)) {
        out.push_back("robot " + std::to_string(r.id) + ": odometry timestamps not strictly increasing");
        break;
      }
    }
  }

  std::set<std::pair<int, int>> seen;
  std::vector<bool> touched(static_cast<std::size_t>(n), false);
  for (std::size_t ei = 0; ei < graph.edges.size(); ++ei) {
    const auto& e = graph.edges[ei];
    const int idx = static_cast<int>(ei);
    if (e.observer < 1 || e.observer > n || e.observed < 1 || e.observed > n) {
      out.push_back(describe(idx, e) + ": unknown robot id");
      continue;
    }
    if (e.observer == e.observed) {
      out.push_back(describe(idx, e) + ": self observation");
      continue;
    }
    if (!seen.insert({e.observer, e.observed}).second) {
      out.push_back(describe(idx, e) + ": duplicate ordered pair");
    }
    touched[static_cast<std::size_t>(e.observer - 1)] = true;
    touched[static_cast<std::size_t>(e.observed - 1)] = true;

    for (std::size_t k = 0; k < e.measurements.size(); ++k) {
      const auto& m = e.measurements[k];
      if (std::abs(m.b.norm() - 1.0) > 1e-9) {
        out.push_back(describe(idx, e) + ": non-unit bearing at t=" + std::to_string(m.t));
      }
      if (k > 0 && !(e.measurements[k - 1].t < m.t)) {
        out.push_back(describe(idx, e) + ": measurement timestamps not strictly increasing");
      }
      if (graph.odometry_at(e.observer, m.t) == nullptr ||
          graph.odometry_at(e.observed, m.t) == nullptr) {
        out.push_back(describe(idx, e) + ": no odometry match for t=" + std::to_string(m.t));
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    if (!touched[static_cast<std::size_t>(i)]) {
      out.push_back("isolated vertex: robot " + std::to_string(i + 1));
    }
  }
  return out;
}

std::vector<PairIndex> enumerate_pairs(const ObservationGraph& graph, const PairPolicy& policy) {
  std::vector<PairIndex> pairs;
  for (std::size_t ei = 0; ei < graph.edges.size(); ++ei) {
    const auto& meas = graph.edges[ei].measurements;
    const int m = static_cast<int>(meas.size());
    const int edge = static_cast<int>(ei);
    if (policy.kind == PairPolicy::Kind::Consecutive) {
      const int s = std::max(1, policy.stride);
      for (int k = 0; k + s < m; ++k) {
        pairs.push_back({edge, meas[static_cast<std::size_t>(k)].t,
                         meas[static_cast<std::size_t>(k + s)].t});
      }
    } else {
      for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
          pairs.push_back({edge, meas[static_cast<std::size_t>(a)].t,
                           meas[static_cast<std::size_t>(b)].t});
        }
      }
    }
  }
  return pairs;
}

bool weakly_connected(const ObservationGraph& graph) {
  const int n = graph.robot_count();
  if (n <= 1) return true;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& e : graph.edges) {
    if (e.observer < 1 || e.observer > n || e.observed < 1 || e.observed > n) continue;
    adj[static_cast<std::size_t>(e.observer - 1)].push_back(e.observed - 1);
    adj[static_cast<std::size_t>(e.observed - 1)].push_back(e.observer - 1);
  }
  std::vector<bool> vis(static_cast<std::size_t>(n), false);
  std::vector<int> stack{0};
  vis[0] = true;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (!vis[static_cast<std::size_t>(w)]) {
        vis[static_cast<std::size_t>(w)] = true;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n;
}

}  // namespace certiloc
