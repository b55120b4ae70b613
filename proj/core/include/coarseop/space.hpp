#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace coarseop {

/// Sorted list of point indices, strictly increasing.
using Subset = std::vector<int>;

/// Finite metric space with bounded-geometry profile. Distances are exact
/// 64-bit floats; every generator produces integer or rational distances and
/// rescales so that the minimum positive distance is at least 1.
/// Immutable after construction.
class MetricSpace {
 public:
  /// Builds from a generator descriptor, e.g. {"type":"path","params":{"n":4}}.
  static MetricSpace build(const nlohmann::json& spec);

  static MetricSpace path(int n);
  static MetricSpace cycle(int n);
  /// dim-dimensional grid with `side` points per axis, l1 word metric.
  static MetricSpace grid(int dim, int side);
  /// n points uniform in [0,1]^dim, edges at Euclidean distance <= radius,
  /// graph shortest-path (hop) metric. Throws if disconnected.
  static MetricSpace random_geometric(int n, double radius, int dim, uint64_t seed);
  /// complete `branching`-ary rooted tree with `depth` levels of edges.
  static MetricSpace tree(int branching, int depth);
  static MetricSpace explicit_matrix(const std::vector<std::vector<double>>& m);
  /// shortest-path metric of a weighted graph, weights >= 1.
  static MetricSpace graph(int n, const std::vector<std::array<double, 3>>& edges);

  int size() const { return n_; }
  double dist(int x, int y) const { return dist_[static_cast<size_t>(x) * n_ + y]; }
  double diameter() const { return diameter_; }
  const std::string& provenance() const { return provenance_; }

  Subset ball(int x, double R) const;
  double set_distance(const Subset& A, const Subset& B) const;
  double point_set_distance(int x, const Subset& A) const;
  Subset neighborhood(const Subset& A, double K) const;
  int geometry_profile(double R) const;
  std::vector<int> geometry_profile(const std::vector<double>& R_list) const;
  /// Greedy r-separated, r-dense net; deterministic scan in index order.
  Subset greedy_net(double r) const;

  /// If built by the grid generator, reports (dim, side) and returns true.
  bool grid_shape(int* dim, int* side) const;
  /// Coordinates of point x in a grid space (index = sum coord_d * side^d).
  std::vector<int> grid_coords(int x) const;

  nlohmann::json to_json() const;

 private:
  MetricSpace(int n, std::vector<double> dist, std::string provenance);
  void validate() const;

  int n_ = 0;
  std::vector<double> dist_;
  double diameter_ = 0;
  std::string provenance_;
};

using SpacePtr = std::shared_ptr<const MetricSpace>;

}  // namespace coarseop
