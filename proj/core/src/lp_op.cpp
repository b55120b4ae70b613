#include "coarseop/lp_op.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "coarseop/rng.hpp"

namespace coarseop {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

bool block_is_zero(const Block& b) {
  for (const auto& v : b)
    if (v != cpx(0)) return false;
  return true;
}
}  // namespace

Subset ScalarFunction::support() const {
  Subset s;
  for (int x = 0; x < static_cast<int>(values.size()); ++x)
    if (values[x] != 0) s.push_back(x);
  return s;
}

ScalarFunction ScalarFunction::characteristic(int n, const Subset& A) {
  ScalarFunction f{std::vector<double>(n, 0.0)};
  for (int x : A) f.values[x] = 1.0;
  return f;
}

ScalarFunction ScalarFunction::tent(const MetricSpace& s, const Subset& S, double L) {
  ScalarFunction f{std::vector<double>(s.size(), 0.0)};
  for (int x = 0; x < s.size(); ++x) {
    double d = s.point_set_distance(x, S);
    f.values[x] = std::clamp(1.0 - L * d, 0.0, 1.0);
  }
  return f;
}

double lipschitz_constant(const MetricSpace& s, const ScalarFunction& f) {
  double best = 0;
  for (int x = 0; x < s.size(); ++x)
    for (int y = x + 1; y < s.size(); ++y)
      best = std::max(best, std::abs(f.values[x] - f.values[y]) / s.dist(x, y));
  return best;
}

LpOperator::LpOperator(SpacePtr space, double p, int k) : space_(std::move(space)), p_(p), k_(k) {
  if (!(p_ >= 1)) throw std::invalid_argument("operator: p must be in [1, inf]");
  if (k_ < 1) throw std::invalid_argument("operator: fiber dimension must be >= 1");
}

void LpOperator::set_block(int x, int y, Block b) {
  if (x < 0 || x >= space_->size() || y < 0 || y >= space_->size())
    throw std::invalid_argument("operator: block index out of range");
  if (static_cast<int>(b.size()) != k_ * k_)
    throw std::invalid_argument("operator: block shape mismatch");
  if (block_is_zero(b))
    entries_.erase({x, y});
  else
    entries_[{x, y}] = std::move(b);
}

void LpOperator::add_to_block(int x, int y, const Block& b) {
  auto it = entries_.find({x, y});
  if (it == entries_.end()) {
    set_block(x, y, b);
    return;
  }
  for (size_t i = 0; i < b.size(); ++i) it->second[i] += b[i];
  if (block_is_zero(it->second)) entries_.erase(it);
}

const Block* LpOperator::block(int x, int y) const {
  auto it = entries_.find({x, y});
  return it == entries_.end() ? nullptr : &it->second;
}

Vec LpOperator::apply(const Vec& v) const {
  if (static_cast<int>(v.size()) != dim())
    throw std::invalid_argument("apply: vector length mismatch");
  Vec out(dim(), cpx(0));
  for (const auto& [xy, blk] : entries_) {
    auto [x, y] = xy;
    for (int i = 0; i < k_; ++i) {
      cpx acc(0);
      for (int j = 0; j < k_; ++j) acc += blk[i * k_ + j] * v[y * k_ + j];
      out[x * k_ + i] += acc;
    }
  }
  return out;
}

LpOperator LpOperator::compose(const LpOperator& other) const {
  if (space_ != other.space_ || p_ != other.p_ || k_ != other.k_)
    throw std::invalid_argument("compose: mismatched space, p or fiber");
  // index other's blocks by row
  std::map<int, std::vector<std::pair<int, const Block*>>> by_row;
  for (const auto& [xy, blk] : other.entries_) by_row[xy.first].push_back({xy.second, &blk});
  LpOperator out(space_, p_, k_);
  for (const auto& [xy, ablk] : entries_) {
    auto it = by_row.find(xy.second);
    if (it == by_row.end()) continue;
    for (const auto& [z, bblk] : it->second) {
      Block prod(k_ * k_, cpx(0));
      for (int i = 0; i < k_; ++i)
        for (int l = 0; l < k_; ++l) {
          cpx a = ablk[i * k_ + l];
          if (a == cpx(0)) continue;
          for (int j = 0; j < k_; ++j) prod[i * k_ + j] += a * (*bblk)[l * k_ + j];
        }
      out.add_to_block(xy.first, z, prod);
    }
  }
  return out;
}

LpOperator LpOperator::add(const LpOperator& other, cpx alpha, cpx beta) const {
  if (space_ != other.space_ || p_ != other.p_ || k_ != other.k_)
    throw std::invalid_argument("add: mismatched space, p or fiber");
  LpOperator out(space_, p_, k_);
  for (const auto& [xy, blk] : entries_) {
    Block b(blk.size());
    for (size_t i = 0; i < blk.size(); ++i) b[i] = alpha * blk[i];
    out.add_to_block(xy.first, xy.second, b);
  }
  for (const auto& [xy, blk] : other.entries_) {
    Block b(blk.size());
    for (size_t i = 0; i < blk.size(); ++i) b[i] = beta * blk[i];
    out.add_to_block(xy.first, xy.second, b);
  }
  return out;
}

LpOperator LpOperator::scaled(cpx alpha) const {
  LpOperator out(space_, p_, k_);
  if (alpha == cpx(0)) return out;
  for (const auto& [xy, blk] : entries_) {
    Block b(blk.size());
    for (size_t i = 0; i < blk.size(); ++i) b[i] = alpha * blk[i];
    out.set_block(xy.first, xy.second, std::move(b));
  }
  return out;
}

LpOperator LpOperator::with_exponent(double p) const {
  LpOperator out(space_, p, k_);
  out.entries_ = entries_;
  return out;
}

double LpOperator::propagation() const {
  double r = 0;
  for (const auto& [xy, blk] : entries_) r = std::max(r, space_->dist(xy.first, xy.second));
  return r;
}

LpOperator LpOperator::band_truncate(double R) const {
  if (R < 0) throw std::invalid_argument("band_truncate: R must be >= 0");
  LpOperator out(space_, p_, k_);
  for (const auto& [xy, blk] : entries_)
    if (space_->dist(xy.first, xy.second) <= R) out.set_block(xy.first, xy.second, Block(blk));
  return out;
}

SparseMat LpOperator::to_sparse() const {
  SparseMat m;
  m.rows = m.cols = dim();
  for (const auto& [xy, blk] : entries_)
    for (int i = 0; i < k_; ++i)
      for (int j = 0; j < k_; ++j)
        if (blk[i * k_ + j] != cpx(0)) m.add(xy.first * k_ + i, xy.second * k_ + j, blk[i * k_ + j]);
  return m;
}

SparseMat LpOperator::restrict_rows_cols(const Subset& A, const Subset& B) const {
  std::vector<int> rpos(space_->size(), -1), cpos(space_->size(), -1);
  for (size_t i = 0; i < A.size(); ++i) rpos[A[i]] = static_cast<int>(i);
  for (size_t i = 0; i < B.size(); ++i) cpos[B[i]] = static_cast<int>(i);
  SparseMat m;
  m.rows = static_cast<int>(A.size()) * k_;
  m.cols = static_cast<int>(B.size()) * k_;
  for (const auto& [xy, blk] : entries_) {
    int r = rpos[xy.first], c = cpos[xy.second];
    if (r < 0 || c < 0) continue;
    for (int i = 0; i < k_; ++i)
      for (int j = 0; j < k_; ++j)
        if (blk[i * k_ + j] != cpx(0)) m.add(r * k_ + i, c * k_ + j, blk[i * k_ + j]);
  }
  return m;
}

LpOperator LpOperator::column_restrict(const Subset& B) const {
  std::vector<char> in(space_->size(), 0);
  for (int b : B) in[b] = 1;
  LpOperator out(space_, p_, k_);
  for (const auto& [xy, blk] : entries_)
    if (in[xy.second]) out.set_block(xy.first, xy.second, Block(blk));
  return out;
}

LpOperator LpOperator::identity(SpacePtr space, double p, int k) {
  LpOperator out(std::move(space), p, k);
  Block eye(k * k, cpx(0));
  for (int i = 0; i < k; ++i) eye[i * k + i] = cpx(1);
  for (int x = 0; x < out.space().size(); ++x) out.set_block(x, x, Block(eye));
  return out;
}

nlohmann::json LpOperator::to_json() const {
  nlohmann::json ent = nlohmann::json::array();
  for (const auto& [xy, blk] : entries_) {
    nlohmann::json bj = nlohmann::json::array();
    for (const auto& v : blk) bj.push_back({v.real(), v.imag()});
    ent.push_back({xy.first, xy.second, bj});
  }
  nlohmann::json j;
  j["p"] = is_inf(p_) ? nlohmann::json("inf") : nlohmann::json(p_);
  j["k"] = k_;
  j["space"] = space_->to_json();
  j["entries"] = ent;
  return j;
}

LpOperator LpOperator::from_json(SpacePtr space, const nlohmann::json& j) {
  double p = j.at("p").is_string() ? parse_exponent(j.at("p").get<std::string>())
                                   : j.at("p").get<double>();
  if (p == 0) p = kInf;
  int k = j.at("k").get<int>();
  LpOperator out(std::move(space), p, k);
  for (const auto& e : j.at("entries")) {
    int x = e.at(0).get<int>(), y = e.at(1).get<int>();
    Block b(k * k);
    const auto& bj = e.at(2);
    if (static_cast<int>(bj.size()) != k * k)
      throw std::invalid_argument("operator file: block size mismatch");
    for (int i = 0; i < k * k; ++i) b[i] = cpx(bj[i][0].get<double>(), bj[i][1].get<double>());
    out.set_block(x, y, std::move(b));
  }
  return out;
}

NormEstimate opnorm(const LpOperator& b, const OpnormOptions& opt) {
  PnormOptions po;
  po.tol = opt.tol;
  po.seed = opt.seed;
  po.max_iter = opt.max_iter;
  return pnorm_estimate(b.to_sparse(), b.p(), po);
}

namespace {

// exact p-norm of a dense submatrix for p in {1, 2, inf}
double exact_submatrix_norm(const SparseMat& m, double p) {
  if (m.val.empty()) return 0;
  if (p == 1) {
    auto s = m.col_abs_sums();
    return *std::max_element(s.begin(), s.end());
  }
  if (is_inf(p)) {
    auto s = m.row_abs_sums();
    return *std::max_element(s.begin(), s.end());
  }
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(m.rows, m.cols);
  for (size_t t = 0; t < m.val.size(); ++t) A(m.ri[t], m.ci[t]) += m.val[t];
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
  return svd.singularValues()(0);
}

Subset maximal_A(const MetricSpace& s, const Subset& B, double R) {
  Subset A;
  for (int x = 0; x < s.size(); ++x) {
    bool far = true;
    for (int y : B)
      if (s.dist(x, y) <= R) {
        far = false;
        break;
      }
    if (far) A.push_back(x);
  }
  return A;
}

EpsPropResult eps_prop_exact_small(const LpOperator& b, double R) {
  const auto& s = b.space();
  int n = s.size();
  if (n > 20)
    throw std::invalid_argument(
        "eps_propagation: exact_small mode is capped at n = 20 (got n = " + std::to_string(n) +
        "); use bounds mode");
  double p = b.p();
  if (!(p == 1 || p == 2 || is_inf(p)))
    throw std::invalid_argument("eps_propagation: exact_small supports p in {1, 2, inf} only");
  EpsPropResult best;
  for (uint32_t mask = 1; mask < (1u << n); ++mask) {
    Subset B;
    for (int y = 0; y < n; ++y)
      if (mask & (1u << y)) B.push_back(y);
    Subset A = maximal_A(s, B, R);
    if (A.empty()) continue;
    double v = exact_submatrix_norm(b.restrict_rows_cols(A, B), p);
    if (v > best.lower) {
      best.lower = best.upper = v;
      best.A = A;
      best.B = B;
    }
  }
  return best;
}

EpsPropResult eps_prop_bounds(const LpOperator& b, double R, const OpnormOptions& opt) {
  const auto& s = b.space();
  int n = s.size();
  int k = b.fiber_dim();
  double p = b.p();

  // mask to the far corner d(x,y) > R
  LpOperator mask(b.space_ptr(), p, k);
  for (const auto& [xy, blk] : b.blocks())
    if (s.dist(xy.first, xy.second) > R) mask.set_block(xy.first, xy.second, Block(blk));

  EpsPropResult out;
  if (mask.blocks().empty()) return out;

  // per-point column/row tail masses of the masked kernel
  std::vector<double> col_tail(n, 0.0), row_tail(n, 0.0);
  for (const auto& [xy, blk] : mask.blocks()) {
    double a = 0;
    for (const auto& v : blk) a += std::abs(v);
    col_tail[xy.second] += a;
    row_tail[xy.first] += a;
  }

  if (p == 1 || is_inf(p)) {
    // exact: optimum is a singleton column (resp. row) with maximal far set
    const bool col = (p == 1);
    int besty = -1;
    double bestv = 0;
    for (int y = 0; y < n; ++y) {
      Subset B = {y};
      Subset A = maximal_A(s, B, R);
      if (A.empty()) continue;
      auto sub = col ? b.restrict_rows_cols(A, B) : b.restrict_rows_cols(B, A);
      double v = exact_submatrix_norm(sub, p);
      if (v > bestv) {
        bestv = v;
        besty = y;
      }
    }
    out.lower = out.upper = bestv;
    if (besty >= 0) {
      if (col) {
        out.B = {besty};
        out.A = maximal_A(s, out.B, R);
      } else {
        out.A = {besty};
        out.B = maximal_A(s, out.A, R);
      }
    }
    return out;
  }

  // general p: greedy lower bound, interpolation upper of the mask
  auto msp = mask.to_sparse();
  double n1 = 0, ninf = 0;
  for (double v : msp.col_abs_sums()) n1 = std::max(n1, v);
  for (double v : msp.row_abs_sums()) ninf = std::max(ninf, v);
  out.upper = std::pow(n1, 1.0 / p) * std::pow(ninf, 1.0 / conjugate_exponent(p));

  PnormOptions po;
  po.tol = opt.tol;
  po.seed = opt.seed;
  auto eval = [&](const Subset& B) -> std::pair<double, Subset> {
    Subset A = maximal_A(s, B, R);
    if (A.empty()) return {0.0, A};
    return {pnorm_estimate(b.restrict_rows_cols(A, B), p, po).lower, A};
  };

  // seed candidates: heaviest tail columns and the heaviest tail row's far set
  std::vector<int> cols_by_tail(n);
  std::iota(cols_by_tail.begin(), cols_by_tail.end(), 0);
  std::stable_sort(cols_by_tail.begin(), cols_by_tail.end(),
                   [&](int a, int c) { return col_tail[a] > col_tail[c]; });
  int singles = n <= 64 ? n : 16;
  Subset bestB;
  double bestv = 0;
  Subset bestA;
  for (int i = 0; i < singles; ++i) {
    if (col_tail[cols_by_tail[i]] == 0) break;
    Subset B = {cols_by_tail[i]};
    auto [v, A] = eval(B);
    if (v > bestv) {
      bestv = v;
      bestB = B;
      bestA = A;
    }
  }
  {
    int r = static_cast<int>(std::max_element(row_tail.begin(), row_tail.end()) - row_tail.begin());
    Subset Arow = {r};
    Subset B = maximal_A(s, Arow, R);
    if (!B.empty()) {
      auto [v, A] = eval(B);
      if (v > bestv) {
        bestv = v;
        bestB = B;
        bestA = A;
      }
    }
  }
  // local set moves: toggle membership while it helps (budgeted)
  int budget = 200;
  bool improved = true;
  while (improved && budget > 0) {
    improved = false;
    for (int y = 0; y < n && budget > 0; ++y) {
      Subset B = bestB;
      auto it = std::lower_bound(B.begin(), B.end(), y);
      if (it != B.end() && *it == y) {
        if (B.size() == 1) continue;
        B.erase(it);
      } else {
        B.insert(it, y);
      }
      --budget;
      auto [v, A] = eval(B);
      if (v > bestv * (1 + 1e-12)) {
        bestv = v;
        bestB = B;
        bestA = A;
        improved = true;
      }
    }
  }
  out.lower = bestv;
  out.upper = std::max(out.upper, out.lower);
  out.A = bestA;
  out.B = bestB;
  return out;
}

}  // namespace

EpsPropResult eps_propagation(const LpOperator& b, double R, EpsPropMode mode,
                              const OpnormOptions& opt) {
  if (R < 0) throw std::invalid_argument("eps_propagation: R must be >= 0");
  if (mode == EpsPropMode::exact_small) return eps_prop_exact_small(b, R);
  return eps_prop_bounds(b, R, opt);
}

QuasiLocalityProfile ql_profile(const LpOperator& b, const std::vector<double>& R_grid,
                                const OpnormOptions& opt) {
  if (!std::is_sorted(R_grid.begin(), R_grid.end()))
    throw std::invalid_argument("ql_profile: R_grid must be sorted");
  QuasiLocalityProfile prof;
  double prev_exact = kInf, prev_upper = kInf;
  for (double R : R_grid) {
    auto r = eps_propagation(b, R, EpsPropMode::bounds, opt);
    if (r.lower == r.upper) {
      if (r.upper > prev_exact + 1e-12)
        throw std::logic_error("ql_profile: exact profile failed monotonicity");
      prev_exact = std::min(prev_exact, r.upper);
      prof.entries.push_back({R, r.upper, ProfileEntry::Tag::exact});
    } else {
      if (r.upper > prev_upper + 1e-12)
        throw std::logic_error("ql_profile: upper profile failed monotonicity");
      prev_upper = std::min(prev_upper, r.upper);
      prof.entries.push_back({R, r.lower, ProfileEntry::Tag::lower});
      prof.entries.push_back({R, r.upper, ProfileEntry::Tag::upper});
    }
  }
  return prof;
}

LpOperator random_band(SpacePtr space, double p, int k, double r, double density,
                       double magnitude, uint64_t seed) {
  if (r < 0 || density <= 0 || density > 1 || magnitude <= 0)
    throw std::invalid_argument("random_band: bad parameters");
  Rng rng(stream_seed(seed, "lp_op.random-band"));
  LpOperator out(space, p, k);
  const auto& s = out.space();
  for (int x = 0; x < s.size(); ++x)
    for (int y = 0; y < s.size(); ++y) {
      if (s.dist(x, y) > r) continue;
      if (!rng.bernoulli(density)) continue;
      Block b(k * k);
      for (auto& v : b) {
        double mod = magnitude * (1.0 - rng.next_double());  // in (0, magnitude]
        double ph = 2 * M_PI * rng.next_double();
        v = std::polar(mod, ph);
      }
      out.set_block(x, y, std::move(b));
    }
  return out;
}

LpOperator shift_pattern(SpacePtr space, double p, int k) {
  LpOperator out(space, p, k);
  Block eye(k * k, cpx(0));
  for (int i = 0; i < k; ++i) eye[i * k + i] = cpx(1);
  for (int x = 0; x + 1 < out.space().size(); ++x) out.set_block(x + 1, x, Block(eye));
  return out;
}

LpOperator neumann_quasilocal(const LpOperator& a, double lambda, double tail_tol,
                              const OpnormOptions& opt) {
  if (tail_tol <= 0) throw std::invalid_argument("neumann: tail_tol must be > 0");
  double na = opnorm(a, opt).upper;
  double x = std::abs(lambda) * na;
  if (x >= 1)
    throw std::invalid_argument("neumann: contraction precondition violated, lambda*|a| = " +
                                std::to_string(x) + " >= 1 (certified norm " + std::to_string(na) +
                                ")");
  LpOperator id = LpOperator::identity(a.space_ptr(), a.p(), a.fiber_dim());
  if (lambda == 0) return id;
  int J = 0;
  while (std::pow(x, J + 1) / (1 - x) > tail_tol) ++J;
  // Horner: S = Id + (lambda a)(Id + (lambda a)(...))
  LpOperator S = id;
  for (int j = 0; j < J; ++j) S = id.add(a.compose(S), cpx(1), cpx(lambda));
  return S;
}

LpOperator commutator(const LpOperator& b, const ScalarFunction& f) {
  if (static_cast<int>(f.values.size()) != b.space().size())
    throw std::invalid_argument("commutator: function length mismatch");
  return b.schur([&](int x, int y) { return cpx(f.values[y] - f.values[x]); });
}

LpOperator multiply_left(const ScalarFunction& f, const LpOperator& b) {
  return b.schur([&](int x, int) { return cpx(f.values[x]); });
}

LpOperator multiply_right(const LpOperator& b, const ScalarFunction& f) {
  return b.schur([&](int, int y) { return cpx(f.values[y]); });
}

namespace {

// certified p->p upper bound for a k x k block
double block_norm_upper(const Block& blk, int k, double p) {
  if (k == 1) return std::abs(blk[0]);
  double n1 = 0, ninf = 0;
  for (int j = 0; j < k; ++j) {
    double c = 0;
    for (int i = 0; i < k; ++i) c += std::abs(blk[i * k + j]);
    n1 = std::max(n1, c);
  }
  for (int i = 0; i < k; ++i) {
    double r = 0;
    for (int j = 0; j < k; ++j) r += std::abs(blk[i * k + j]);
    ninf = std::max(ninf, r);
  }
  if (p == 1) return n1;
  if (is_inf(p)) return ninf;
  return std::pow(n1, 1.0 / p) * std::pow(ninf, 1.0 / conjugate_exponent(p));
}

}  // namespace

CommutBound commut_bound_band(const LpOperator& b, double L) {
  if (L < 0) throw std::invalid_argument("commut_bound_band: L must be >= 0");
  CommutBound cb;
  cb.L = L;
  double R = b.propagation();
  // decomposition count = bipartite chromatic index = max row/column degree
  std::vector<int> rdeg(b.space().size(), 0), cdeg(b.space().size(), 0);
  double mu = 0;
  for (const auto& [xy, blk] : b.blocks()) {
    ++rdeg[xy.first];
    ++cdeg[xy.second];
    mu = std::max(mu, block_norm_upper(blk, b.fiber_dim(), b.p()));
  }
  int K = 0;
  for (int x = 0; x < b.space().size(); ++x) K = std::max({K, rdeg[x], cdeg[x]});
  cb.upper = static_cast<double>(K) * mu * L * R;
  return cb;
}

CommutBound commut_search(const LpOperator& b, double L, int budget, uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("commut_search: budget must be >= 1");
  CommutBound cb;
  cb.L = L;
  const auto& s = b.space();
  int n = s.size();
  OpnormOptions quick;
  quick.tol = 1e-8;
  quick.seed = seed;
  auto eval = [&](const ScalarFunction& f) { return opnorm(commutator(b, f), quick).lower; };

  ScalarFunction best = ScalarFunction::constant(n, 0.0);
  double bestv = 0;
  int evals = 0;

  // tent candidates at singletons (net points when the space is large)
  Subset centers;
  if (n <= 256) {
    centers.resize(n);
    std::iota(centers.begin(), centers.end(), 0);
  } else {
    centers = s.greedy_net(L > 0 ? std::max(1.0, 1.0 / L) : 1.0);
  }
  for (int c : centers) {
    if (evals >= budget) break;
    ScalarFunction f = ScalarFunction::tent(s, {c}, L);
    ++evals;
    double v = eval(f);
    if (v > bestv) {
      bestv = v;
      best = f;
    }
  }
  // witness sets from the eps-propagation machinery
  if (evals < budget) {
    auto w = eps_propagation(b, 0.0, EpsPropMode::bounds, quick);
    if (!w.B.empty()) {
      ScalarFunction f = ScalarFunction::tent(s, w.B, L);
      ++evals;
      double v = eval(f);
      if (v > bestv) {
        bestv = v;
        best = f;
      }
    }
  }

  // coordinate ascent with Lipschitz-feasibility repair
  Rng rng(stream_seed(seed, "lp_op.commut-search"));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  bool improved = true;
  while (improved && evals < budget) {
    improved = false;
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.next_below(i)]);
    for (int x : order) {
      if (evals >= budget) break;
      double lo = -1, hi = 1;
      for (int y = 0; y < n; ++y) {
        if (y == x) continue;
        double slack = L * s.dist(x, y);
        lo = std::max(lo, best.values[y] - slack);
        hi = std::min(hi, best.values[y] + slack);
      }
      if (lo > hi) continue;  // cannot happen for a feasible f
      for (double cand : {lo, hi}) {
        if (cand == best.values[x]) continue;
        ScalarFunction f = best;
        f.values[x] = cand;
        ++evals;
        double v = eval(f);
        if (v > bestv * (1 + 1e-10)) {
          bestv = v;
          best = std::move(f);
          improved = true;
          break;
        }
        if (evals >= budget) break;
      }
    }
  }

  // tighten the final value
  cb.lower = opnorm(commutator(b, best), {1e-12, seed}).lower;
  cb.witness_f = std::move(best);
  return cb;
}

}  // namespace coarseop
