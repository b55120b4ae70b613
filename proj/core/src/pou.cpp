#include "coarseop/pou.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace coarseop {

namespace {

double subset_diameter(const MetricSpace& s, const Subset& A) {
  double d = 0;
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = i + 1; j < A.size(); ++j) d = std::max(d, s.dist(A[i], A[j]));
  return d;
}

int family_multiplicity(int n, const std::vector<ScalarFunction>& fs) {
  std::vector<int> cnt(n, 0);
  for (const auto& f : fs)
    for (int x = 0; x < n; ++x)
      if (f.values[x] > 0) ++cnt[x];
  return cnt.empty() ? 0 : *std::max_element(cnt.begin(), cnt.end());
}

bool one_convention(double p) { return p == 1 || is_inf(p); }

}  // namespace

Cover disjoint_cover(const MetricSpace& s, double r) {
  if (r < 1) throw std::invalid_argument("disjoint_cover: r must be >= 1");
  Subset net = s.greedy_net(r);
  Cover c;
  c.members.assign(net.size(), {});
  for (int x = 0; x < s.size(); ++x) {
    size_t best = 0;
    for (size_t i = 1; i < net.size(); ++i)
      if (s.dist(x, net[i]) < s.dist(x, net[best])) best = i;  // ties keep lowest index
    c.members[best].push_back(x);
  }
  // greedy nets can leave a center with an empty cell only if it is never
  // nearest to anything, which its own point rules out; still, drop empties
  std::erase_if(c.members, [](const Subset& m) { return m.empty(); });
  for (const auto& m : c.members) c.diameter_bound = std::max(c.diameter_bound, subset_diameter(s, m));
  c.multiplicity = 1;
  return c;
}

PartitionOfUnity pou_from_cover(const MetricSpace& s, const Cover& cover, double p) {
  verify_cover(s, cover);
  int n = s.size();
  size_t m = cover.members.size();
  std::vector<ScalarFunction> g(m, ScalarFunction::constant(n, 0.0));
  for (size_t i = 0; i < m; ++i)
    for (int x = 0; x < n; ++x)
      g[i].values[x] = std::max(0.0, 1.0 - s.point_set_distance(x, cover.members[i]));
  PartitionOfUnity pou;
  pou.p = p;
  pou.phi = std::move(g);
  for (int x = 0; x < n; ++x) {
    double tot = 0;
    if (one_convention(p)) {
      for (const auto& f : pou.phi) tot += f.values[x];
    } else {
      for (const auto& f : pou.phi) tot += std::pow(f.values[x], p);
      tot = std::pow(tot, 1.0 / p);
    }
    if (tot <= 0) throw std::logic_error("pou_from_cover: uncovered point " + std::to_string(x));
    for (auto& f : pou.phi) f.values[x] /= tot;
  }
  for (const auto& f : pou.phi)
    pou.support_diameter = std::max(pou.support_diameter, subset_diameter(s, f.support()));
  pou.multiplicity = family_multiplicity(n, pou.phi);
  verify_partition(s, pou);
  return pou;
}

namespace {

struct GridInfo {
  int dim = 0, side = 0;
};

GridInfo require_grid(const MetricSpace& s) {
  GridInfo g;
  if (!s.grid_shape(&g.dim, &g.side))
    throw std::invalid_argument("folner partition requires a grid-generated space");
  return g;
}

// number of fully-inside S-box translates containing x, per axis product
long long translate_count(const GridInfo& g, const std::vector<int>& xc, int S) {
  long long c = 1;
  int top = std::max(g.side - S, 0);
  for (int d = 0; d < g.dim; ++d) {
    int lo = std::max(0, xc[d] - S + 1), hi = std::min(top, xc[d]);
    c *= std::max(0, hi - lo + 1);
  }
  return c;
}

}  // namespace

PartitionOfUnity grid_folner_pou(const MetricSpace& s, int S, double p) {
  if (S < 1) throw std::invalid_argument("folner partition: S must be >= 1");
  GridInfo g = require_grid(s);
  int n = s.size();
  S = std::min(S, g.side);  // S >= side collapses to the single full box
  int top = g.side - S;

  // enumerate corners z in [0, top]^dim, lexicographic
  std::vector<std::vector<int>> corners;
  std::vector<int> z(g.dim, 0);
  for (;;) {
    corners.push_back(z);
    int d = 0;
    while (d < g.dim && ++z[d] > top) z[d++] = 0;
    if (d == g.dim) break;
  }

  std::vector<long long> count(n, 0);
  std::vector<std::vector<int>> coords(n);
  for (int x = 0; x < n; ++x) {
    coords[x] = s.grid_coords(x);
    count[x] = translate_count(g, coords[x], S);
  }

  PartitionOfUnity pou;
  pou.p = p;
  pou.phi.reserve(corners.size());
  for (const auto& c : corners) {
    ScalarFunction f = ScalarFunction::constant(n, 0.0);
    for (int x = 0; x < n; ++x) {
      bool inside = true;
      for (int d = 0; d < g.dim; ++d)
        if (coords[x][d] < c[d] || coords[x][d] >= c[d] + S) {
          inside = false;
          break;
        }
      if (!inside) continue;
      double cnt = static_cast<double>(count[x]);
      f.values[x] = one_convention(p) ? 1.0 / cnt : std::pow(cnt, -1.0 / p);
    }
    pou.phi.push_back(std::move(f));
  }
  for (const auto& f : pou.phi)
    pou.support_diameter = std::max(pou.support_diameter, subset_diameter(s, f.support()));
  pou.multiplicity = family_multiplicity(n, pou.phi);
  verify_partition(s, pou);
  return pou;
}

Subset grid_bulk(const MetricSpace& s, int S) {
  GridInfo g = require_grid(s);
  S = std::min(S, g.side);
  long long full = 1;
  for (int d = 0; d < g.dim; ++d) full *= std::min(S, g.side - S + 1);
  Subset bulk;
  for (int x = 0; x < s.size(); ++x)
    if (translate_count(g, s.grid_coords(x), S) == full) bulk.push_back(x);
  return bulk;
}

namespace {

// per-point sparse view: (function index, value) pairs, index-sorted
struct SparsePou {
  std::vector<std::vector<std::pair<int, double>>> at;
  double p;

  explicit SparsePou(int n, const PartitionOfUnity& pou) : at(n), p(pou.p) {
    for (int i = 0; i < static_cast<int>(pou.phi.size()); ++i)
      for (int x = 0; x < n; ++x)
        if (pou.phi[i].values[x] > 0) at[x].push_back({i, pou.phi[i].values[x]});
  }

  double pair_variation(int x, int y) const {
    const auto &a = at[x], &b = at[y];
    size_t i = 0, j = 0;
    double sum = 0;
    bool one = one_convention(p);
    auto acc = [&](double d) { sum += one ? d : std::pow(d, p); };
    while (i < a.size() || j < b.size()) {
      if (j == b.size() || (i < a.size() && a[i].first < b[j].first))
        acc(a[i++].second);
      else if (i == a.size() || b[j].first < a[i].first)
        acc(b[j++].second);
      else {
        acc(std::abs(a[i].second - b[j].second));
        ++i, ++j;
      }
    }
    return one ? sum : std::pow(sum, 1.0 / p);
  }
};

}  // namespace

double variation(const MetricSpace& s, const PartitionOfUnity& pou, double r) {
  Subset all(s.size());
  std::iota(all.begin(), all.end(), 0);
  return variation_on(s, pou, r, all);
}

double variation_on(const MetricSpace& s, const PartitionOfUnity& pou, double r,
                    const Subset& pts) {
  if (r < 0) throw std::invalid_argument("variation: r must be >= 0");
  SparsePou sp(s.size(), pou);
  double best = 0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) {
      if (s.dist(pts[i], pts[j]) > r) continue;
      best = std::max(best, sp.pair_variation(pts[i], pts[j]));
    }
  return best;
}

bool variation_below(const MetricSpace& s, const PartitionOfUnity& pou, double r, double tau) {
  if (r < 0) throw std::invalid_argument("variation: r must be >= 0");
  SparsePou sp(s.size(), pou);
  for (int x = 0; x < s.size(); ++x)
    for (int y = x + 1; y < s.size(); ++y) {
      if (s.dist(x, y) > r) continue;
      if (sp.pair_variation(x, y) > tau) return false;
    }
  return true;
}

DualFamily dual_family(const MetricSpace& s, const PartitionOfUnity& pou, double L,
                       double plateau) {
  if (L <= 0) throw std::invalid_argument("dual_family: L must be > 0");
  if (plateau < 0) throw std::invalid_argument("dual_family: plateau must be >= 0");
  DualFamily d;
  d.L = L;
  d.halo_radius = plateau + 1.0 / L;
  for (const auto& f : pou.phi) {
    Subset sup = f.support();
    ScalarFunction psi = ScalarFunction::constant(s.size(), 0.0);
    if (!sup.empty())
      for (int x = 0; x < s.size(); ++x) {
        double excess = std::max(0.0, s.point_set_distance(x, sup) - plateau);
        psi.values[x] = std::clamp(1.0 - L * excess, 0.0, 1.0);
      }
    d.psi.push_back(std::move(psi));
  }
  verify_dual(s, pou, d);
  return d;
}

Coloring color_family(const std::vector<Subset>& family) {
  size_t m = family.size();
  std::vector<std::vector<int>> adj(m);
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j) {
      // sorted subsets: linear intersection test
      bool meet = false;
      size_t a = 0, b = 0;
      while (a < family[i].size() && b < family[j].size()) {
        if (family[i][a] == family[j][b]) {
          meet = true;
          break;
        }
        (family[i][a] < family[j][b]) ? ++a : ++b;
      }
      if (meet) {
        adj[i].push_back(static_cast<int>(j));
        adj[j].push_back(static_cast<int>(i));
      }
    }
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return adj[a].size() > adj[b].size(); });
  Coloring col;
  col.assignment.assign(m, -1);
  for (int i : order) {
    std::vector<char> used(m + 1, 0);
    for (int j : adj[i])
      if (col.assignment[j] >= 0) used[col.assignment[j]] = 1;
    int c = 0;
    while (used[c]) ++c;
    col.assignment[i] = c;
    col.colors = std::max(col.colors, c + 1);
  }
  if (m == 0) col.colors = 0;
  return col;
}

void verify_cover(const MetricSpace& s, const Cover& c) {
  std::vector<int> cnt(s.size(), 0);
  for (const auto& m : c.members) {
    if (m.empty()) throw std::logic_error("cover: empty member");
    if (!std::is_sorted(m.begin(), m.end())) throw std::logic_error("cover: member not sorted");
    if (subset_diameter(s, m) > c.diameter_bound + 1e-12)
      throw std::logic_error("cover: member exceeds diameter bound");
    for (int x : m) {
      if (x < 0 || x >= s.size()) throw std::logic_error("cover: point out of range");
      ++cnt[x];
    }
  }
  for (int x = 0; x < s.size(); ++x) {
    if (cnt[x] == 0) throw std::logic_error("cover: point " + std::to_string(x) + " uncovered");
    if (cnt[x] > c.multiplicity) throw std::logic_error("cover: multiplicity exceeded");
  }
}

void verify_partition(const MetricSpace& s, const PartitionOfUnity& pou) {
  for (const auto& f : pou.phi) {
    if (static_cast<int>(f.values.size()) != s.size())
      throw std::logic_error("partition: function length mismatch");
    for (double v : f.values)
      if (v < 0 || v > 1 + 1e-12) throw std::logic_error("partition: value outside [0,1]");
    if (subset_diameter(s, f.support()) > pou.support_diameter + 1e-12)
      throw std::logic_error("partition: support diameter exceeded");
  }
  for (int x = 0; x < s.size(); ++x) {
    double sum = 0;
    for (const auto& f : pou.phi)
      sum += one_convention(pou.p) ? f.values[x] : std::pow(f.values[x], pou.p);
    if (std::abs(sum - 1.0) > 1e-10)
      throw std::logic_error("partition: sum deviates from 1 at point " + std::to_string(x));
  }
  if (family_multiplicity(s.size(), pou.phi) > pou.multiplicity)
    throw std::logic_error("partition: multiplicity exceeded");
}

void verify_dual(const MetricSpace& s, const PartitionOfUnity& pou, const DualFamily& dual) {
  if (dual.psi.size() != pou.phi.size())
    throw std::logic_error("dual family: index misalignment");
  for (size_t i = 0; i < dual.psi.size(); ++i) {
    const auto& psi = dual.psi[i];
    Subset sup = pou.phi[i].support();
    if (sup.empty()) continue;
    for (int x : sup)
      if (psi.values[x] != 1.0)
        throw std::logic_error("dual family: not identically 1 on the support");
    for (int x = 0; x < s.size(); ++x) {
      if (psi.values[x] > 0 && s.point_set_distance(x, sup) > dual.halo_radius + 1e-12)
        throw std::logic_error("dual family: support escapes the halo");
    }
    if (lipschitz_constant(s, psi) > dual.L + 1e-10)
      throw std::logic_error("dual family: Lipschitz constant exceeded");
  }
}

void verify_coloring(const std::vector<Subset>& family, const Coloring& col) {
  if (col.assignment.size() != family.size())
    throw std::logic_error("coloring: assignment length mismatch");
  for (size_t i = 0; i < family.size(); ++i)
    for (size_t j = i + 1; j < family.size(); ++j) {
      if (col.assignment[i] != col.assignment[j]) continue;
      size_t a = 0, b = 0;
      while (a < family[i].size() && b < family[j].size()) {
        if (family[i][a] == family[j][b])
          throw std::logic_error("coloring: color class not disjoint");
        (family[i][a] < family[j][b]) ? ++a : ++b;
      }
    }
}

nlohmann::json pou_to_json(const PartitionOfUnity& pou) {
  nlohmann::json funcs = nlohmann::json::array();
  for (const auto& f : pou.phi) {
    Subset sup = f.support();
    nlohmann::json vals = nlohmann::json::array();
    for (int x : sup) vals.push_back(f.values[x]);
    funcs.push_back({{"support", sup}, {"values", vals}});
  }
  return {{"p", is_inf(pou.p) ? nlohmann::json("inf") : nlohmann::json(pou.p)},
          {"functions", funcs}};
}

PartitionOfUnity pou_from_json(const MetricSpace& s, const nlohmann::json& j) {
  PartitionOfUnity pou;
  pou.p = j.at("p").is_string() ? parse_exponent(j.at("p").get<std::string>())
                                : j.at("p").get<double>();
  if (pou.p == 0) pou.p = std::numeric_limits<double>::infinity();
  for (const auto& fj : j.at("functions")) {
    ScalarFunction f = ScalarFunction::constant(s.size(), 0.0);
    auto sup = fj.at("support").get<std::vector<int>>();
    auto vals = fj.at("values").get<std::vector<double>>();
    if (sup.size() != vals.size())
      throw std::invalid_argument("partition file: support/values length mismatch");
    for (size_t i = 0; i < sup.size(); ++i) {
      if (sup[i] < 0 || sup[i] >= s.size())
        throw std::invalid_argument("partition file: point out of range");
      f.values[sup[i]] = vals[i];
    }
    pou.phi.push_back(std::move(f));
  }
  for (const auto& f : pou.phi) {
    Subset sup = f.support();
    double d = 0;
    for (size_t a = 0; a < sup.size(); ++a)
      for (size_t b = a + 1; b < sup.size(); ++b) d = std::max(d, s.dist(sup[a], sup[b]));
    pou.support_diameter = std::max(pou.support_diameter, d);
  }
  pou.multiplicity = family_multiplicity(s.size(), pou.phi);
  verify_partition(s, pou);
  return pou;
}

}  // namespace coarseop
