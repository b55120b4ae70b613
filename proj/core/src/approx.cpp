#include "coarseop/approx.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coarseop {

namespace {

// owner[x] = index of the family member with x in its support, -1 if none;
// throws naming the colliding pair on overlap
std::vector<int> disjoint_owners(int n, const std::vector<ScalarFunction>& family) {
  std::vector<int> owner(n, -1);
  for (int i = 0; i < static_cast<int>(family.size()); ++i) {
    if (static_cast<int>(family[i].values.size()) != n)
      throw std::invalid_argument("cutdown family: function length mismatch");
    for (int x = 0; x < n; ++x) {
      double v = family[i].values[x];
      if (v < 0 || v > 1) throw std::invalid_argument("cutdown family: value outside [0,1]");
      if (v == 0) continue;
      if (owner[x] >= 0)
        throw std::invalid_argument("cutdown family: members " + std::to_string(owner[x]) +
                                    " and " + std::to_string(i) + " overlap at point " +
                                    std::to_string(x));
      owner[x] = i;
    }
  }
  return owner;
}

}  // namespace

LpOperator block_cutdown(const LpOperator& b, const std::vector<ScalarFunction>& family) {
  auto owner = disjoint_owners(b.space().size(), family);
  return b.schur([&](int x, int y) -> cpx {
    if (owner[x] < 0 || owner[x] != owner[y]) return cpx(0);
    return cpx(family[owner[x]].values[x] * family[owner[y]].values[y]);
  });
}

BandDecomposition band_decompose(const LpOperator& b) {
  const int n = b.space().size();
  std::vector<std::pair<int, int>> edges;
  edges.reserve(b.blocks().size());
  for (const auto& [xy, blk] : b.blocks()) edges.push_back(xy);

  std::vector<int> rdeg(n, 0), cdeg(n, 0);
  for (auto [x, y] : edges) ++rdeg[x], ++cdeg[y];
  int delta = 0;
  for (int v = 0; v < n; ++v) delta = std::max({delta, rdeg[v], cdeg[v]});

  BandDecomposition dec;
  dec.fiber_dim = b.fiber_dim();
  if (edges.empty()) return dec;

  // proper edge coloring of the bipartite support graph with delta colors
  std::vector<std::vector<int>> at_row(n, std::vector<int>(delta, -1));
  std::vector<std::vector<int>> at_col(n, std::vector<int>(delta, -1));
  std::vector<int> color(edges.size(), -1);
  auto free_color = [&](const std::vector<int>& slots) {
    for (int c = 0; c < delta; ++c)
      if (slots[c] < 0) return c;
    throw std::logic_error("edge coloring: no free color (degree bookkeeping broken)");
  };
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    auto [x, y] = edges[e];
    int a = free_color(at_row[x]);
    int bc = free_color(at_col[y]);
    if (at_col[y][a] >= 0) {
      // swap colors a/bc along the alternating path starting at y; by the
      // bipartite parity argument it never reaches x, so a stays free there
      std::vector<int> path;
      int cur = y, want = a;
      bool col_side = true;
      while (true) {
        int eid = col_side ? at_col[cur][want] : at_row[cur][want];
        if (eid < 0) break;
        path.push_back(eid);
        cur = col_side ? edges[eid].first : edges[eid].second;
        col_side = !col_side;
        want = (want == a) ? bc : a;
      }
      for (int eid : path) {
        at_row[edges[eid].first][color[eid]] = -1;
        at_col[edges[eid].second][color[eid]] = -1;
        color[eid] = (color[eid] == a) ? bc : a;
      }
      for (int eid : path) {
        at_row[edges[eid].first][color[eid]] = eid;
        at_col[edges[eid].second][color[eid]] = eid;
      }
    }
    color[e] = a;
    at_row[x][a] = e;
    at_col[y][a] = e;
  }

  dec.parts.assign(delta, {});
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    auto [x, y] = edges[e];
    auto& part = dec.parts[color[e]];
    part.multiplier.push_back({x, *b.block(x, y)});
    part.translation.pairs.push_back({x, y});
    part.translation.displacement =
        std::max(part.translation.displacement, b.space().dist(x, y));
  }
  for (auto& part : dec.parts) {
    std::vector<size_t> order(part.translation.pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
      return part.translation.pairs[i].first < part.translation.pairs[j].first;
    });
    decltype(part.multiplier) mul;
    decltype(part.translation.pairs) prs;
    for (size_t i : order) {
      mul.push_back(std::move(part.multiplier[i]));
      prs.push_back(part.translation.pairs[i]);
    }
    part.multiplier = std::move(mul);
    part.translation.pairs = std::move(prs);
  }
  return dec;
}

LpOperator rebuild(const BandDecomposition& dec, SpacePtr space, double p) {
  LpOperator out(std::move(space), p, dec.fiber_dim);
  for (const auto& part : dec.parts)
    for (size_t i = 0; i < part.multiplier.size(); ++i) {
      auto [x, blk] = part.multiplier[i];
      out.add_to_block(x, part.translation.pairs[i].second, blk);
    }
  return out;
}

namespace {

bool one_exp(double p) { return p == 1 || is_inf(p); }

// per-point lists (i, phi_i(x)) over the partition, index-sorted
std::vector<std::vector<std::pair<int, double>>> point_lists(int n, const PartitionOfUnity& pou) {
  std::vector<std::vector<std::pair<int, double>>> at(n);
  for (int i = 0; i < static_cast<int>(pou.phi.size()); ++i)
    for (int x = 0; x < n; ++x)
      if (pou.phi[i].values[x] > 0) at[x].push_back({i, pou.phi[i].values[x]});
  return at;
}

}  // namespace

LpOperator approximant_end(const LpOperator& b, const PartitionOfUnity& pou,
                           const DualFamily& dual) {
  if (!one_exp(b.p()))
    throw std::invalid_argument("approximant_end: p must be 1 or inf; use approximant_mid");
  if (!one_exp(pou.p)) throw std::invalid_argument("approximant_end: needs a 1-partition");
  if (dual.psi.size() != pou.phi.size())
    throw std::invalid_argument("approximant_end: dual family misaligned");
  auto at = point_lists(b.space().size(), pou);
  const bool p1 = (b.p() == 1);
  // p=inf: Sum_i phi_i b psi_i; p=1: Sum_i psi_i b phi_i
  return b.schur([&](int x, int y) -> cpx {
    double c = 0;
    if (p1) {
      for (const auto& [i, v] : at[y]) c += dual.psi[i].values[x] * v;
    } else {
      for (const auto& [i, v] : at[x]) c += v * dual.psi[i].values[y];
    }
    return cpx(c);
  });
}

DefectCertificate defect_certificate_end(const LpOperator& b, const PartitionOfUnity& pou,
                                         const DualFamily& dual) {
  LpOperator approx = approximant_end(b, pou, dual);
  DefectCertificate cert;
  cert.defect = opnorm(b.add(approx, cpx(1), cpx(-1))).upper;
  for (const auto& psi : dual.psi)
    cert.bound = std::max(cert.bound, opnorm(commutator(b, psi)).upper);
  if (cert.defect > cert.bound + 1e-8)
    throw std::logic_error("end approximant: defect exceeds its commutator certificate");
  return cert;
}

LpOperator approximant_mid(const LpOperator& b, const PartitionOfUnity& pou) {
  double p = b.p();
  if (one_exp(p))
    throw std::invalid_argument("approximant_mid: p must be in (1, inf); use approximant_end");
  if (pou.p != p) throw std::invalid_argument("approximant_mid: partition exponent mismatch");
  double pq = p / conjugate_exponent(p);  // = p - 1
  auto at = point_lists(b.space().size(), pou);
  return b.schur([&](int x, int y) -> cpx {
    double c = 0;
    for (const auto& [i, v] : at[x]) c += std::pow(v, pq) * pou.phi[i].values[y];
    return cpx(c);
  });
}

HaloCheck halo_estimate_check(const LpOperator& b, const std::vector<ScalarFunction>& family,
                              double L) {
  if (L <= 0) throw std::invalid_argument("halo check: L must be > 0");
  const auto& s = b.space();
  // supports pairwise farther than 2/L
  std::vector<Subset> sup;
  for (const auto& f : family) sup.push_back(f.support());
  for (size_t i = 0; i < sup.size(); ++i)
    for (size_t j = i + 1; j < sup.size(); ++j)
      if (s.set_distance(sup[i], sup[j]) <= 2.0 / L)
        throw std::invalid_argument("halo check: members " + std::to_string(i) + " and " +
                                    std::to_string(j) + " violate the 2/L separation");
  ScalarFunction e = ScalarFunction::constant(s.size(), 0.0);
  for (const auto& f : family)
    for (int x = 0; x < s.size(); ++x) e.values[x] += f.values[x];
  LpOperator ebe = multiply_left(e, multiply_right(b, e));
  LpOperator diff = ebe.add(block_cutdown(b, family), cpx(1), cpx(-1));
  NormEstimate est = opnorm(diff);
  HaloCheck hc;
  hc.lhs = est.upper;
  hc.rhs = commut_bound_band(b, L).upper.value();
  if (est.lower > hc.rhs + 1e-8)
    throw std::logic_error("halo check: attained value exceeds the band certificate");
  hc.certified = hc.lhs <= hc.rhs + 1e-8;
  return hc;
}

namespace {

struct Candidate {
  double R;
  double defect;
};

std::vector<Candidate> truncate_ladder(const LpOperator& b, const OpnormOptions& opt) {
  std::vector<double> radii;
  for (const auto& [xy, blk] : b.blocks()) radii.push_back(b.space().dist(xy.first, xy.second));
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  std::vector<Candidate> out;
  out.push_back({0.0, opnorm(b, opt).upper});  // the zero approximant
  for (double R : radii)
    out.push_back({R, opnorm(b.add(b.band_truncate(R), cpx(1), cpx(-1)), opt).upper});
  return out;
}

std::vector<double> radius_ladder(const MetricSpace& s) {
  std::vector<double> out;
  double top = std::max(1.0, s.diameter());
  for (double r = 1; r < top; r *= 2) out.push_back(r);
  out.push_back(top);
  return out;
}

std::vector<Candidate> end_ladder(const LpOperator& b, const OpnormOptions& opt) {
  std::vector<Candidate> out;
  for (double r : radius_ladder(b.space())) {
    Cover cov = disjoint_cover(b.space(), r);
    PartitionOfUnity pou = pou_from_cover(b.space(), cov, b.p());
    DualFamily dual = dual_family(b.space(), pou, 1.0 / r);
    LpOperator a = approximant_end(b, pou, dual);
    out.push_back({a.propagation(), opnorm(b.add(a, cpx(1), cpx(-1)), opt).upper});
  }
  std::sort(out.begin(), out.end(), [](auto& a, auto& c) { return a.R < c.R; });
  return out;
}

std::vector<Candidate> mid_ladder(const LpOperator& b, const OpnormOptions& opt) {
  std::vector<Candidate> out;
  int dim = 0, side = 0;
  if (b.space().grid_shape(&dim, &side)) {
    for (int S = 1; S <= side; S = (S < side && 2 * S > side) ? side : 2 * S) {
      PartitionOfUnity pou = grid_folner_pou(b.space(), S, b.p());
      LpOperator a = approximant_mid(b, pou);
      out.push_back({a.propagation(), opnorm(b.add(a, cpx(1), cpx(-1)), opt).upper});
    }
  } else {
    for (double r : radius_ladder(b.space())) {
      Cover cov = disjoint_cover(b.space(), r);
      PartitionOfUnity pou = pou_from_cover(b.space(), cov, b.p());
      LpOperator a = approximant_mid(b, pou);
      out.push_back({a.propagation(), opnorm(b.add(a, cpx(1), cpx(-1)), opt).upper});
    }
  }
  std::sort(out.begin(), out.end(), [](auto& a, auto& c) { return a.R < c.R; });
  return out;
}

}  // namespace

ApproximationCurve roe_curve(const LpOperator& b, const std::vector<double>& eps_grid,
                             const std::vector<ApproxMethod>& methods,
                             const OpnormOptions& opt) {
  for (size_t i = 1; i < eps_grid.size(); ++i)
    if (eps_grid[i] > eps_grid[i - 1])
      throw std::invalid_argument("roe_curve: eps grid must be sorted descending");
  ApproximationCurve curve;
  for (ApproxMethod method : methods) {
    std::vector<Candidate> ladder;
    switch (method) {
      case ApproxMethod::truncate:
        ladder = truncate_ladder(b, opt);
        break;
      case ApproxMethod::pou_end:
        if (!one_exp(b.p()))
          throw std::invalid_argument("roe_curve: pou_end needs p in {1, inf}");
        ladder = end_ladder(b, opt);
        break;
      case ApproxMethod::pou_mid:
        if (one_exp(b.p()))
          throw std::invalid_argument("roe_curve: pou_mid needs p in (1, inf)");
        ladder = mid_ladder(b, opt);
        break;
    }
    for (double eps : eps_grid) {
      ApproximationCurve::Row row;
      row.eps = eps;
      row.method = method;
      const Candidate* pick = nullptr;
      for (const auto& c : ladder)
        if (c.defect <= eps) {
          pick = &c;
          break;
        }
      if (pick) {
        row.achieved = true;
      } else {
        for (const auto& c : ladder)
          if (!pick || c.defect < pick->defect) pick = &c;
      }
      row.R = pick->R;
      row.defect = pick->defect;
      curve.rows.push_back(row);
    }
  }
  return curve;
}

MidPipelineReport mid_pipeline(const LpOperator& b, double eps, const OpnormOptions& opt) {
  if (eps <= 0) throw std::invalid_argument("mid pipeline: eps must be > 0");
  if (one_exp(b.p())) throw std::invalid_argument("mid pipeline: p must be in (1, inf)");
  int dim = 0, side = 0;
  if (!b.space().grid_shape(&dim, &side))
    throw std::invalid_argument("mid pipeline: requires a grid space");

  MidPipelineReport rep;
  rep.eps = eps;
  rep.M = opnorm(b, opt).upper;
  if (rep.M == 0) {
    rep.L = 1;
    rep.K = 1;
    rep.S = side;
    return rep;
  }
  double unit = commut_bound_band(b, 1.0).upper.value();  // = K * mu * R at L = 1
  double eps_commut = eps / std::max(4 * rep.M, 24.0);
  rep.L = unit > 0 ? eps_commut / unit : 1.0;
  double s = b.propagation();
  rep.K = b.space().geometry_profile(s + 1.0 / rep.L);
  rep.variation_target = eps / (4 * rep.M * rep.K);
  rep.variation_radius = std::min(s + 2.0 / rep.L, b.space().diameter());

  for (int S = 1; S <= side; ++S) {
    PartitionOfUnity pou = grid_folner_pou(b.space(), S, b.p());
    if (!variation_below(b.space(), pou, rep.variation_radius, rep.variation_target)) continue;
    rep.S = S;
    rep.variation_measured = variation(b.space(), pou, rep.variation_radius);
    LpOperator approx = approximant_mid(b, pou);
    rep.defect = opnorm(b.add(approx, cpx(1), cpx(-1)), opt).upper;
    rep.approx_norm = opnorm(approx, opt).upper;
    return rep;
  }
  throw std::logic_error("mid pipeline: no box side met the variation target");
}

}  // namespace coarseop
