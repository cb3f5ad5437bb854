#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rdrls {

/// Undirected connected sensor network. Nodes are 0-based internally;
/// the edge-list text format uses 1-based ids. Every node belongs to its
/// own neighborhood, so neighborhood_size(k) >= 1 always.
class Topology {
 public:
  /// Builds from an explicit edge list (self-loops rejected, duplicates
  /// merged). Throws std::invalid_argument if node_count < 2 or the graph
  /// is not connected.
  Topology(int node_count, const std::vector<std::pair<int, int>>& edges);

  /// Samples each off-diagonal pair with link_probability, then adds the
  /// missing edges of a random spanning tree so the result is always
  /// connected. Deterministic for a given seed.
  static Topology random_connected(int node_count, double link_probability,
                                   std::uint64_t seed);

  int node_count() const { return node_count_; }
  bool linked(int a, int b) const;

  /// Sorted neighborhood of k, including k itself.
  const std::vector<int>& neighbors(int k) const { return neighborhoods_[k]; }
  int neighborhood_size(int k) const {
    return static_cast<int>(neighborhoods_[k].size());
  }

  /// Undirected edges as (m, k) with m < k, 0-based.
  std::vector<std::pair<int, int>> edges() const;

  /// One "m k" pair per line, 1-based node ids.
  std::string to_edge_list() const;
  static Topology from_edge_list(int node_count, const std::string& block);

 private:
  int node_count_ = 0;
  std::vector<std::vector<char>> adjacency_;
  std::vector<std::vector<int>> neighborhoods_;

  void finalize_and_validate();
};

/// Diffusion combination weights c(m, k): the weight node k assigns to the
/// intermediate estimate received from neighbor m. Columns sum to one and
/// the support matches the neighborhoods exactly.
class CombinationMatrix {
 public:
  static CombinationMatrix metropolis(const Topology& topology);
  static CombinationMatrix identity(int node_count);

  int size() const { return static_cast<int>(weights_.cols()); }
  double weight(int m, int k) const { return weights_(m, k); }
  const Eigen::MatrixXd& matrix() const { return weights_; }

 private:
  explicit CombinationMatrix(Eigen::MatrixXd weights)
      : weights_(std::move(weights)) {}

  Eigen::MatrixXd weights_;
};

}  // namespace rdrls
