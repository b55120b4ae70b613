#include "coarseop/space.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <sstream>

#include "coarseop/rng.hpp"

namespace coarseop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string describe(const nlohmann::json& j) { return j.dump(); }

// All-pairs shortest paths for a weighted graph given as adjacency lists.
// Dijkstra from every source; weights >= 1 so distances stay >= 1.
std::vector<double> all_pairs(int n, const std::vector<std::vector<std::pair<int, double>>>& adj) {
  std::vector<double> d(static_cast<size_t>(n) * n, kInf);
  for (int s = 0; s < n; ++s) {
    double* row = d.data() + static_cast<size_t>(s) * n;
    row[s] = 0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    pq.push({0.0, s});
    while (!pq.empty()) {
      auto [du, u] = pq.top();
      pq.pop();
      if (du > row[u]) continue;
      for (auto [v, w] : adj[u]) {
        if (row[u] + w < row[v]) {
          row[v] = row[u] + w;
          pq.push({row[v], v});
        }
      }
    }
    for (int t = 0; t < n; ++t) {
      if (!std::isfinite(row[t]))
        throw std::invalid_argument("space: graph is disconnected (no finite distance from " +
                                    std::to_string(s) + " to " + std::to_string(t) + ")");
    }
  }
  return d;
}

}  // namespace

MetricSpace::MetricSpace(int n, std::vector<double> dist, std::string provenance)
    : n_(n), dist_(std::move(dist)), provenance_(std::move(provenance)) {
  validate();
  for (double v : dist_) diameter_ = std::max(diameter_, v);
}

void MetricSpace::validate() const {
  if (n_ <= 0) throw std::invalid_argument("space: point count must be positive");
  for (int x = 0; x < n_; ++x) {
    if (dist(x, x) != 0)
      throw std::invalid_argument("space: dist(" + std::to_string(x) + "," + std::to_string(x) +
                                  ") != 0");
    for (int y = 0; y < n_; ++y) {
      double d = dist(x, y);
      if (!std::isfinite(d) || d < 0)
        throw std::invalid_argument("space: non-finite or negative distance at (" +
                                    std::to_string(x) + "," + std::to_string(y) + ")");
      if (d != dist(y, x))
        throw std::invalid_argument("space: asymmetric at (" + std::to_string(x) + "," +
                                    std::to_string(y) + ")");
      if (x != y && d < 1)
        throw std::invalid_argument("space: uniform discreteness violated at (" +
                                    std::to_string(x) + "," + std::to_string(y) + "): d=" +
                                    std::to_string(d));
    }
  }
  // Triangle inequality: exhaustive up to n=200, sampled above.
  auto check_triple = [&](int x, int y, int z) {
    if (dist(x, y) > dist(x, z) + dist(z, y))
      throw std::invalid_argument("space: triangle inequality violated by triple (" +
                                  std::to_string(x) + "," + std::to_string(y) + "," +
                                  std::to_string(z) + ")");
  };
  if (n_ <= 200) {
    for (int x = 0; x < n_; ++x)
      for (int y = 0; y < n_; ++y)
        for (int z = 0; z < n_; ++z) check_triple(x, y, z);
  } else {
    Rng rng(stream_seed(0, "space.triangle-sample"));
    for (int i = 0; i < 1000000; ++i) {
      int x = static_cast<int>(rng.next_below(n_));
      int y = static_cast<int>(rng.next_below(n_));
      int z = static_cast<int>(rng.next_below(n_));
      check_triple(x, y, z);
    }
  }
}

MetricSpace MetricSpace::path(int n) {
  if (n <= 0) throw std::invalid_argument("path: n must be positive");
  std::vector<double> d(static_cast<size_t>(n) * n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) d[static_cast<size_t>(x) * n + y] = std::abs(x - y);
  nlohmann::json prov = {{"type", "path"}, {"params", {{"n", n}}}};
  return MetricSpace(n, std::move(d), describe(prov));
}

MetricSpace MetricSpace::cycle(int n) {
  if (n <= 0) throw std::invalid_argument("cycle: n must be positive");
  std::vector<double> d(static_cast<size_t>(n) * n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      int a = std::abs(x - y);
      d[static_cast<size_t>(x) * n + y] = std::min(a, n - a);
    }
  nlohmann::json prov = {{"type", "cycle"}, {"params", {{"n", n}}}};
  return MetricSpace(n, std::move(d), describe(prov));
}

MetricSpace MetricSpace::grid(int dim, int side) {
  if (dim <= 0 || side <= 0) throw std::invalid_argument("grid: dim and side must be positive");
  double npts = std::pow(static_cast<double>(side), dim);
  if (npts > 1e7) throw std::invalid_argument("grid: too many points");
  int n = static_cast<int>(npts + 0.5);
  std::vector<int> coords(static_cast<size_t>(n) * dim);
  for (int x = 0; x < n; ++x) {
    int rem = x;
    for (int dgt = 0; dgt < dim; ++dgt) {
      coords[static_cast<size_t>(x) * dim + dgt] = rem % side;
      rem /= side;
    }
  }
  std::vector<double> d(static_cast<size_t>(n) * n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      int s = 0;
      for (int dgt = 0; dgt < dim; ++dgt)
        s += std::abs(coords[static_cast<size_t>(x) * dim + dgt] -
                      coords[static_cast<size_t>(y) * dim + dgt]);
      d[static_cast<size_t>(x) * n + y] = s;
    }
  nlohmann::json prov = {{"type", "grid"}, {"params", {{"dim", dim}, {"side", side}}}};
  return MetricSpace(n, std::move(d), describe(prov));
}

MetricSpace MetricSpace::random_geometric(int n, double radius, int dim, uint64_t seed) {
  if (n <= 0 || dim <= 0 || radius <= 0)
    throw std::invalid_argument("random_geometric: bad parameters");
  Rng rng(stream_seed(seed, "space.random-geometric"));
  std::vector<double> pts(static_cast<size_t>(n) * dim);
  for (auto& v : pts) v = rng.next_double();
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      double s = 0;
      for (int dgt = 0; dgt < dim; ++dgt) {
        double diff = pts[static_cast<size_t>(x) * dim + dgt] -
                      pts[static_cast<size_t>(y) * dim + dgt];
        s += diff * diff;
      }
      if (s <= radius * radius) {
        adj[x].push_back({y, 1.0});
        adj[y].push_back({x, 1.0});
      }
    }
  auto d = all_pairs(n, adj);
  nlohmann::json prov = {{"type", "random_geometric"},
                         {"params",
                          {{"n", n}, {"radius", radius}, {"dim", dim}, {"seed", seed}}}};
  return MetricSpace(n, std::move(d), describe(prov));
}

MetricSpace MetricSpace::tree(int branching, int depth) {
  if (branching <= 0 || depth < 0) throw std::invalid_argument("tree: bad parameters");
  // nodes level by level; node 0 is the root
  std::vector<std::vector<std::pair<int, double>>> adj;
  adj.emplace_back();
  std::vector<int> frontier = {0};
  for (int lvl = 0; lvl < depth; ++lvl) {
    std::vector<int> next;
    for (int parent : frontier)
      for (int c = 0; c < branching; ++c) {
        int id = static_cast<int>(adj.size());
        adj.emplace_back();
        adj[parent].push_back({id, 1.0});
        adj[id].push_back({parent, 1.0});
        next.push_back(id);
      }
    frontier = std::move(next);
  }
  int n = static_cast<int>(adj.size());
  auto d = all_pairs(n, adj);
  nlohmann::json prov = {{"type", "tree"},
                         {"params", {{"branching", branching}, {"depth", depth}}}};
  return MetricSpace(n, std::move(d), describe(prov));
}

MetricSpace MetricSpace::explicit_matrix(const std::vector<std::vector<double>>& m) {
  int n = static_cast<int>(m.size());
  if (n == 0) throw std::invalid_argument("explicit: empty matrix");
  std::vector<double> d(static_cast<size_t>(n) * n);
  double minpos = kInf;
  for (int x = 0; x < n; ++x) {
    if (static_cast<int>(m[x].size()) != n)
      throw std::invalid_argument("explicit: matrix is not square");
    for (int y = 0; y < n; ++y) {
      d[static_cast<size_t>(x) * n + y] = m[x][y];
      if (x != y && m[x][y] > 0) minpos = std::min(minpos, m[x][y]);
    }
  }
  // rescale so the minimum positive distance is >= 1
  if (std::isfinite(minpos) && minpos < 1) {
    for (auto& v : d) v /= minpos;
  }
  nlohmann::json prov = {{"type", "explicit"}, {"params", {{"n", n}}}};
  return MetricSpace(n, std::move(d), describe(prov));
}

MetricSpace MetricSpace::graph(int n, const std::vector<std::array<double, 3>>& edges) {
  if (n <= 0) throw std::invalid_argument("graph: n must be positive");
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const auto& e : edges) {
    int u = static_cast<int>(e[0]), v = static_cast<int>(e[1]);
    double w = e[2];
    if (u < 0 || u >= n || v < 0 || v >= n || u == v)
      throw std::invalid_argument("graph: bad edge endpoints");
    if (w < 1) throw std::invalid_argument("graph: edge weights must be >= 1");
    adj[u].push_back({v, w});
    adj[v].push_back({u, w});
  }
  auto d = all_pairs(n, adj);
  nlohmann::json prov = {{"type", "graph"}, {"params", {{"n", n}, {"edges", edges.size()}}}};
  return MetricSpace(n, std::move(d), describe(prov));
}

MetricSpace MetricSpace::build(const nlohmann::json& spec) {
  if (!spec.contains("type")) throw std::invalid_argument("space spec: missing \"type\"");
  std::string type = spec.at("type").get<std::string>();
  nlohmann::json p = spec.value("params", nlohmann::json::object());
  if (type == "path") return path(p.at("n").get<int>());
  if (type == "cycle") return cycle(p.at("n").get<int>());
  if (type == "grid") return grid(p.at("dim").get<int>(), p.at("side").get<int>());
  if (type == "random_geometric")
    return random_geometric(p.at("n").get<int>(), p.at("radius").get<double>(),
                            p.at("dim").get<int>(), p.value("seed", 0ULL));
  if (type == "tree") return tree(p.at("branching").get<int>(), p.at("depth").get<int>());
  if (type == "explicit") {
    auto m = spec.contains("matrix") ? spec.at("matrix") : p.at("matrix");
    return explicit_matrix(m.get<std::vector<std::vector<double>>>());
  }
  if (type == "graph") {
    auto edges = p.at("edges").get<std::vector<std::array<double, 3>>>();
    return graph(p.at("n").get<int>(), edges);
  }
  throw std::invalid_argument("space spec: unknown type \"" + type + "\"");
}

nlohmann::json MetricSpace::to_json() const { return nlohmann::json::parse(provenance_); }

Subset MetricSpace::ball(int x, double R) const {
  if (x < 0 || x >= n_) throw std::invalid_argument("ball: point out of range");
  Subset out;
  for (int y = 0; y < n_; ++y)
    if (dist(x, y) <= R) out.push_back(y);
  return out;
}

double MetricSpace::set_distance(const Subset& A, const Subset& B) const {
  if (A.empty() || B.empty()) throw std::invalid_argument("set_distance: empty set");
  double best = kInf;
  for (int a : A)
    for (int b : B) best = std::min(best, dist(a, b));
  return best;
}

double MetricSpace::point_set_distance(int x, const Subset& A) const {
  if (A.empty()) throw std::invalid_argument("point_set_distance: empty set");
  double best = kInf;
  for (int a : A) best = std::min(best, dist(x, a));
  return best;
}

Subset MetricSpace::neighborhood(const Subset& A, double K) const {
  if (K < 0) throw std::invalid_argument("neighborhood: K must be >= 0");
  Subset out;
  for (int x = 0; x < n_; ++x) {
    for (int a : A)
      if (dist(x, a) <= K) {
        out.push_back(x);
        break;
      }
  }
  return out;
}

int MetricSpace::geometry_profile(double R) const {
  int best = 0;
  for (int x = 0; x < n_; ++x) {
    int c = 0;
    for (int y = 0; y < n_; ++y)
      if (dist(x, y) <= R) ++c;
    best = std::max(best, c);
  }
  return best;
}

std::vector<int> MetricSpace::geometry_profile(const std::vector<double>& R_list) const {
  if (!std::is_sorted(R_list.begin(), R_list.end()))
    throw std::invalid_argument("geometry_profile: R_list must be sorted");
  std::vector<int> out;
  out.reserve(R_list.size());
  for (double R : R_list) out.push_back(geometry_profile(R));
  return out;
}

Subset MetricSpace::greedy_net(double r) const {
  Subset net;
  for (int x = 0; x < n_; ++x) {
    bool ok = true;
    for (int y : net)
      if (dist(x, y) <= r) {
        ok = false;
        break;
      }
    if (ok) net.push_back(x);
  }
  return net;
}

bool MetricSpace::grid_shape(int* dim, int* side) const {
  auto j = nlohmann::json::parse(provenance_);
  if (j.value("type", "") != "grid") return false;
  if (dim) *dim = j["params"]["dim"].get<int>();
  if (side) *side = j["params"]["side"].get<int>();
  return true;
}

std::vector<int> MetricSpace::grid_coords(int x) const {
  int dim = 0, side = 0;
  if (!grid_shape(&dim, &side)) throw std::logic_error("grid_coords: not a grid space");
  std::vector<int> c(dim);
  for (int d = 0; d < dim; ++d) {
    c[d] = x % side;
    x /= side;
  }
  return c;
}

}  // namespace coarseop
