#include "coarseop/locality.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "coarseop/rng.hpp"

namespace coarseop {

namespace {

double subset_diam(const MetricSpace& s, const Subset& A) {
  double d = 0;
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = i + 1; j < A.size(); ++j) d = std::max(d, s.dist(A[i], A[j]));
  return d;
}

int schedule_box_side(int m, int dim, double c, int cap) {
  // cap prevents an endless climb at c = 1; f >= cap means "whole window"
  int f = 1;
  while (f < cap && std::pow(static_cast<double>(f) / (f + m), dim) < c) ++f;
  return f;
}

SparsificationResult sparsify_grid_shift(const MetricSpace& s, const std::vector<double>& w,
                                         int m, double c) {
  int dim = 0, side = 0;
  s.grid_shape(&dim, &side);
  SparsificationResult res;
  res.m = m;
  res.total_mass = std::accumulate(w.begin(), w.end(), 0.0);
  res.f = schedule_box_side(m, dim, c, side);

  std::vector<std::vector<int>> coords(s.size());
  for (int x = 0; x < s.size(); ++x) coords[x] = s.grid_coords(x);

  if (res.f >= side) {
    // one component swallows the whole window
    Subset all(s.size());
    std::iota(all.begin(), all.end(), 0);
    res.components = {all};
    res.fraction = 1.0;
    res.diameter_bound = s.diameter();
    res.success = true;
    return res;
  }

  const int period = res.f + m;
  long long nshift = 1;
  for (int d = 0; d < dim; ++d) nshift *= period;

  double best_mass = -1;
  std::vector<int> best_shift;
  std::vector<int> shift(dim, 0);
  for (long long t = 0; t < nshift; ++t) {
    double mass = 0;
    for (int x = 0; x < s.size(); ++x) {
      bool keep = true;
      for (int d = 0; d < dim; ++d)
        if ((coords[x][d] + shift[d]) % period >= res.f) {
          keep = false;
          break;
        }
      if (keep) mass += w[x];
    }
    if (mass > best_mass) {
      best_mass = mass;
      best_shift = shift;
    }
    int d = 0;
    while (d < dim && ++shift[d] == period) shift[d++] = 0;
  }

  // group the kept points of the best shift into box components
  std::map<std::vector<int>, Subset> boxes;
  for (int x = 0; x < s.size(); ++x) {
    std::vector<int> key(dim);
    bool keep = true;
    for (int d = 0; d < dim; ++d) {
      int shifted = coords[x][d] + best_shift[d];
      if (shifted % period >= res.f) {
        keep = false;
        break;
      }
      key[d] = shifted / period;
    }
    if (keep) boxes[key].push_back(x);
  }
  for (auto& [key, pts] : boxes) {
    res.diameter_bound = std::max(res.diameter_bound, subset_diam(s, pts));
    res.components.push_back(std::move(pts));
  }
  res.fraction = res.total_mass > 0 ? best_mass / res.total_mass : 1.0;
  res.success = res.fraction + 1e-12 >= c;
  return res;
}

SparsificationResult sparsify_greedy(const MetricSpace& s, const std::vector<double>& w, int m,
                                     double c) {
  SparsificationResult res;
  res.m = m;
  res.total_mass = std::accumulate(w.begin(), w.end(), 0.0);
  res.f = schedule_box_side(m, 1, c, s.size());

  std::vector<char> blocked(s.size(), 0);
  double captured = 0;
  for (;;) {
    int seed_pt = -1;
    for (int x = 0; x < s.size(); ++x)
      if (!blocked[x] && (seed_pt < 0 || w[x] > w[seed_pt])) seed_pt = x;
    if (seed_pt < 0) break;
    Subset comp;
    for (int x = 0; x < s.size(); ++x)
      if (!blocked[x] && s.dist(seed_pt, x) <= res.f / 2.0) comp.push_back(x);
    for (int x : comp) captured += w[x];
    res.diameter_bound = std::max(res.diameter_bound, subset_diam(s, comp));
    for (int x = 0; x < s.size(); ++x)
      if (!blocked[x] && s.point_set_distance(x, comp) < m) blocked[x] = 1;
    res.components.push_back(std::move(comp));
  }
  res.fraction = res.total_mass > 0 ? captured / res.total_mass : 1.0;
  res.success = res.fraction + 1e-12 >= c;
  return res;
}

}  // namespace

SparsificationResult sparsify(const MetricSpace& s, const std::vector<double>& weights, int m,
                              double c, SparsifyStrategy strategy) {
  if (m < 1) throw std::invalid_argument("sparsify: m must be >= 1");
  if (!(c > 0 && c <= 1)) throw std::invalid_argument("sparsify: c must be in (0, 1]");
  if (static_cast<int>(weights.size()) != s.size())
    throw std::invalid_argument("sparsify: weight vector length mismatch");
  for (double v : weights)
    if (v < 0 || !std::isfinite(v)) throw std::invalid_argument("sparsify: weights must be >= 0");
  if (strategy == SparsifyStrategy::grid_shift) {
    int dim = 0, side = 0;
    if (!s.grid_shape(&dim, &side))
      throw std::invalid_argument("sparsify: grid_shift needs a grid space");
    return sparsify_grid_shift(s, weights, m, c);
  }
  return sparsify_greedy(s, weights, m, c);
}

LocalisationResult onl_search(const LpOperator& b, double S, const OpnormOptions& opt) {
  if (S < 0) throw std::invalid_argument("onl_search: S must be >= 0");
  const auto& s = b.space();
  int k = b.fiber_dim();
  Subset all(s.size());
  std::iota(all.begin(), all.end(), 0);
  PnormOptions po;
  po.tol = opt.tol;
  po.seed = opt.seed;

  LocalisationResult best;
  best.reference = opnorm(b, opt).lower;
  Subset best_window;
  for (int x = 0; x < s.size(); ++x) {
    Subset W = s.ball(x, S / 2.0);
    NormEstimate est = pnorm_estimate(b.restrict_rows_cols(all, W), b.p(), po);
    if (est.lower > best.achieved) {
      best.achieved = est.lower;
      best_window = W;
      best.v.assign(b.dim(), cpx(0));
      for (size_t i = 0; i < W.size(); ++i)
        for (int j = 0; j < k; ++j) best.v[W[i] * k + j] = est.witness[i * k + j];
    }
  }
  double nv = vec_pnorm(best.v, b.p());
  if (nv > 0)
    for (auto& t : best.v) t /= nv;
  Subset sup;
  for (int x = 0; x < s.size(); ++x)
    for (int j = 0; j < k; ++j)
      if (best.v[x * k + j] != cpx(0)) {
        sup.push_back(x);
        break;
      }
  best.support_diameter = subset_diam(s, sup);
  best.certified = true;  // exhaustive over ball windows
  return best;
}

LocalisationResult ql_localise(const LpOperator& b, double L, double eps,
                               const OpnormOptions& opt) {
  if (L <= 0 || eps <= 0) throw std::invalid_argument("ql_localise: need L > 0 and eps > 0");
  const auto& s = b.space();
  int k = b.fiber_dim();
  double p = b.p();

  NormEstimate full = opnorm(b, opt);
  LocalisationResult res;
  res.reference = full.lower;
  const Vec& w = full.witness;

  // mass distribution of the near-maximizer
  std::vector<double> mu(s.size(), 0.0);
  for (int x = 0; x < s.size(); ++x) {
    Vec fib(w.begin() + static_cast<long>(x) * k, w.begin() + static_cast<long>(x + 1) * k);
    double nv = vec_pnorm(fib, p);
    mu[x] = is_inf(p) ? nv : std::pow(nv, p);
  }

  int m = static_cast<int>(std::ceil(4.0 / L));
  double M = std::max(full.lower, 1e-300);
  double c = is_inf(p) ? 0.5 : 1.0 - 0.5 * std::pow(eps / M, p);
  c = std::clamp(c, 1e-9, 1.0);

  int dim = 0, side = 0;
  SparsifyStrategy strat = s.grid_shape(&dim, &side) ? SparsifyStrategy::grid_shift
                                                     : SparsifyStrategy::greedy;
  SparsificationResult sp = sparsify(s, mu, m, c, strat);
  res.sparsify_success = sp.success;

  // best component restriction of the witness
  double best_ratio = -1;
  for (const auto& comp : sp.components) {
    Vec v(b.dim(), cpx(0));
    for (int x : comp)
      for (int j = 0; j < k; ++j) v[x * k + j] = w[x * k + j];
    double nv = vec_pnorm(v, p);
    if (nv == 0) continue;
    double ratio = vec_pnorm(b.apply(v), p) / nv;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      for (auto& t : v) t /= nv;
      res.v = std::move(v);
      res.support_diameter = subset_diam(s, comp);
    }
  }
  if (best_ratio < 0) {
    // witness vanished on every component; fall back to its heaviest point
    int x0 = static_cast<int>(std::max_element(mu.begin(), mu.end()) - mu.begin());
    res.v.assign(b.dim(), cpx(0));
    res.v[x0 * k] = cpx(1);
    best_ratio = vec_pnorm(b.apply(res.v), p);
    res.support_diameter = 0;
  }
  res.achieved = best_ratio;

  CommutBound cb = commut_bound_band(b, L);
  bool commut_ok = cb.upper && *cb.upper <= eps * (1 + 1e-12);
  if (res.sparsify_success && commut_ok && !is_inf(p)) {
    res.certified = true;
    if (res.achieved < res.reference - 6 * eps - 1e-9)
      throw std::logic_error("ql_localise: certified instance violated the localisation bound");
  }
  return res;
}

InverseReport inverse_experiment(const LpOperator& a, double delta,
                                 const std::vector<double>& eps_grid,
                                 const OpnormOptions& opt) {
  InverseReport rep;
  rep.delta = delta;
  rep.a_norm_upper = opnorm(a, opt).upper;
  if (delta < 0 || delta * rep.a_norm_upper >= 1)
    throw std::invalid_argument(
        "inverse experiment: contraction precondition delta * |a| < 1 violated (delta * |a| = " +
        std::to_string(delta * rep.a_norm_upper) + ")");

  const auto& s = a.space();
  int k = a.fiber_dim();
  int N = a.dim();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(N, N);
  for (const auto& [xy, blk] : a.blocks())
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        A(xy.first * k + i, xy.second * k + j) -= delta * blk[i * k + j];
  Eigen::MatrixXcd B = A.partialPivLu().solve(Eigen::MatrixXcd::Identity(N, N));

  LpOperator b(a.space_ptr(), a.p(), k);
  for (int x = 0; x < s.size(); ++x)
    for (int y = 0; y < s.size(); ++y) {
      Block blk(k * k);
      bool nz = false;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          blk[i * k + j] = B(x * k + i, y * k + j);
          nz = nz || blk[i * k + j] != cpx(0);
        }
      if (nz) b.set_block(x, y, std::move(blk));
    }

  LpOperator id = LpOperator::identity(a.space_ptr(), a.p(), k);
  LpOperator lhs = id.add(a, cpx(1), cpx(-delta)).compose(b);
  rep.residual = opnorm(lhs.add(id, cpx(1), cpx(-1)), opt).upper;

  double prop_a = std::max(a.propagation(), 1.0);
  double x = delta * rep.a_norm_upper;
  int Rmax = static_cast<int>(std::min(20.0, s.diameter()));
  for (int R = 1; R <= Rmax; ++R) {
    auto nu = eps_propagation(b, R, EpsPropMode::bounds, opt);
    if (nu.lower == nu.upper)
      rep.profile.push_back({static_cast<double>(R), nu.upper, ProfileEntry::Tag::exact});
    else
      rep.profile.push_back({static_cast<double>(R), nu.upper, ProfileEntry::Tag::upper});
    rep.envelope.push_back(std::pow(x, std::ceil(R / prop_a)) / (1 - x));
  }
  rep.curve = roe_curve(b, eps_grid, {ApproxMethod::truncate}, opt);
  rep.b = std::move(b);
  return rep;
}

std::vector<PropertyARow> property_a_report(SpacePtr space, const std::vector<double>& r_grid,
                                            const std::vector<int>& S_grid, double p,
                                            uint64_t seed) {
  std::vector<PropertyARow> rows;
  const MetricSpace& s = *space;
  LpOperator b = random_band(space, p, 1, 1.0, 0.9, 1.0, stream_seed(seed, "property-a.band"));
  double ref = opnorm(b).lower;
  int dim = 0, side = 0;
  bool grid = s.grid_shape(&dim, &side);

  for (int S : S_grid) {
    PartitionOfUnity pou;
    if (grid) {
      pou = grid_folner_pou(s, S, p);
    } else {
      Cover cov = disjoint_cover(s, std::max(1, S));
      pou = pou_from_cover(s, cov, p);
    }
    LocalisationResult onl = onl_search(b, 2.0 * S);
    for (double r : r_grid) {
      PropertyARow row;
      row.S = S;
      row.r = r;
      row.variation = variation(s, pou, r);
      row.onl_ratio = ref > 0 ? onl.achieved / ref : 1.0;
      std::vector<double> uniform(s.size(), 1.0);
      SparsificationResult sp =
          sparsify(s, uniform, std::max(1, static_cast<int>(std::lround(r))), 0.5,
                   grid ? SparsifyStrategy::grid_shift : SparsifyStrategy::greedy);
      row.sparsify_fraction = sp.fraction;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace coarseop
