#include "rdrls/topology.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "rdrls/rng.hpp"

namespace rdrls {

namespace {

bool is_connected(const std::vector<std::vector<char>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  std::vector<char> seen(n, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int w = 0; w < n; ++w) {
      if (adjacency[v][w] && !seen[w]) {
        seen[w] = 1;
        ++reached;
        frontier.push(w);
      }
    }
  }
  return reached == n;
}

}  // namespace

Topology::Topology(int node_count,
                   const std::vector<std::pair<int, int>>& edges)
    : node_count_(node_count) {
  if (node_count < 2) {
    throw std::invalid_argument("Topology: node_count must be >= 2");
  }
  adjacency_.assign(node_count, std::vector<char>(node_count, 0));
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= node_count || b >= node_count) {
      throw std::invalid_argument("Topology: edge endpoint out of range");
    }
    if (a == b) {
      throw std::invalid_argument("Topology: explicit self-loops not allowed");
    }
    adjacency_[a][b] = 1;
    adjacency_[b][a] = 1;
  }
  finalize_and_validate();
}

void Topology::finalize_and_validate() {
  if (!is_connected(adjacency_)) {
    throw std::invalid_argument("Topology: graph is not connected");
  }
  neighborhoods_.assign(node_count_, {});
  for (int k = 0; k < node_count_; ++k) {
    for (int m = 0; m < node_count_; ++m) {
      if (m == k || adjacency_[m][k]) neighborhoods_[k].push_back(m);
    }
  }
}

Topology Topology::random_connected(int node_count, double link_probability,
                                    std::uint64_t seed) {
  if (node_count < 2) {
    throw std::invalid_argument("random_connected: node_count must be >= 2");
  }
  if (!(link_probability > 0.0) || link_probability > 1.0) {
    throw std::invalid_argument(
        "random_connected: link_probability must be in (0, 1]");
  }
  Xoshiro256 rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < node_count; ++a) {
    for (int b = a + 1; b < node_count; ++b) {
      if (rng.uniform01() < link_probability) edges.emplace_back(a, b);
    }
  }
  // Random spanning tree: shuffle the nodes, attach each to a random
  // predecessor. Any edge already present is simply kept.
  std::vector<int> order(node_count);
  std::iota(order.begin(), order.end(), 0);
  for (int i = node_count - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  for (int i = 1; i < node_count; ++i) {
    const int j = static_cast<int>(rng.next() % static_cast<std::uint64_t>(i));
    edges.emplace_back(order[i], order[j]);
  }
  return Topology(node_count, edges);
}

bool Topology::linked(int a, int b) const {
  return adjacency_[a][b] != 0;
}

std::vector<std::pair<int, int>> Topology::edges() const {
  std::vector<std::pair<int, int>> result;
  for (int a = 0; a < node_count_; ++a) {
    for (int b = a + 1; b < node_count_; ++b) {
      if (adjacency_[a][b]) result.emplace_back(a, b);
    }
  }
  return result;
}

std::string Topology::to_edge_list() const {
  std::ostringstream out;
  for (const auto& [a, b] : edges()) {
    out << (a + 1) << ' ' << (b + 1) << '\n';
  }
  return out.str();
}

Topology Topology::from_edge_list(int node_count, const std::string& block) {
  std::vector<std::pair<int, int>> edges;
  std::istringstream in(block);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    int a = 0;
    int b = 0;
    if (!(fields >> a)) continue;  // blank line
    if (!(fields >> b)) {
      throw std::invalid_argument("edge list: expected 'm k' pair, got '" +
                                  line + "'");
    }
    std::string extra;
    if (fields >> extra) {
      throw std::invalid_argument("edge list: trailing tokens in '" + line +
                                  "'");
    }
    if (a < 1 || b < 1) {
      throw std::invalid_argument("edge list: node ids are 1-based");
    }
    edges.emplace_back(a - 1, b - 1);
  }
  return Topology(node_count, edges);
}

CombinationMatrix CombinationMatrix::metropolis(const Topology& topology) {
  const int n = topology.node_count();
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double off_neighbor_sum = 0.0;
    for (int m : topology.neighbors(k)) {
      if (m == k) continue;
      const double w = 1.0 / static_cast<double>(std::max(
                                 topology.neighborhood_size(k),
                                 topology.neighborhood_size(m)));
      weights(m, k) = w;
      off_neighbor_sum += w;
    }
    weights(k, k) = 1.0 - off_neighbor_sum;
  }
  return CombinationMatrix(std::move(weights));
}

CombinationMatrix CombinationMatrix::identity(int node_count) {
  return CombinationMatrix(Eigen::MatrixXd::Identity(node_count, node_count));
}

}  // namespace rdrls
