#pragma once

#include <map>
#include <optional>
#include <utility>

#include "coarseop/pnorm.hpp"
#include "coarseop/space.hpp"

namespace coarseop {

/// Real-valued function on the points of a space, values in [-1, 1]
/// ([0, 1] for positive contractions). Acts block-diagonally on fibers.
struct ScalarFunction {
  std::vector<double> values;

  Subset support() const;
  static ScalarFunction constant(int n, double v) { return {std::vector<double>(n, v)}; }
  static ScalarFunction characteristic(int n, const Subset& A);
  /// tent: clamp_{[0,1]}(1 - L * d(x, S)); an L-Lipschitz positive contraction
  static ScalarFunction tent(const MetricSpace& s, const Subset& S, double L);
};

double lipschitz_constant(const MetricSpace& s, const ScalarFunction& f);

/// k x k complex block, row-major.
using Block = std::vector<cpx>;

/// Sparse block operator on l^p(X; C^k); fiber C^k carries the p-norm, so the
/// flattened kernel acts on l^p over X x {1..k}. Zero blocks are never stored.
/// Immutable use after construction is thread-safe.
class LpOperator {
 public:
  LpOperator(SpacePtr space, double p, int k);

  const MetricSpace& space() const { return *space_; }
  SpacePtr space_ptr() const { return space_; }
  double p() const { return p_; }
  double q() const { return conjugate_exponent(p_); }
  int fiber_dim() const { return k_; }
  int dim() const { return space_->size() * k_; }
  const std::map<std::pair<int, int>, Block>& blocks() const { return entries_; }

  void set_block(int x, int y, Block b);  // drops exactly-zero blocks
  void add_to_block(int x, int y, const Block& b);
  const Block* block(int x, int y) const;

  Vec apply(const Vec& v) const;
  LpOperator compose(const LpOperator& other) const;                      // this * other
  LpOperator add(const LpOperator& other, cpx alpha, cpx beta) const;     // alpha*this + beta*other
  LpOperator scaled(cpx alpha) const;
  LpOperator with_exponent(double p) const;  // same kernel, different p

  double propagation() const;  // max d(x,y) over stored blocks; 0 if empty
  LpOperator band_truncate(double R) const;
  /// Schur product with the coefficient c(x,y); drops resulting zero blocks.
  template <class F>
  LpOperator schur(F&& coeff) const {
    LpOperator out(space_, p_, k_);
    for (const auto& [xy, blk] : entries_) {
      cpx c = coeff(xy.first, xy.second);
      if (c == cpx(0)) continue;
      Block b(blk.size());
      for (size_t i = 0; i < blk.size(); ++i) b[i] = c * blk[i];
      out.set_block(xy.first, xy.second, std::move(b));
    }
    return out;
  }

  SparseMat to_sparse() const;
  /// flattened dense submatrix, rows A x fibers by cols B x fibers
  SparseMat restrict_rows_cols(const Subset& A, const Subset& B) const;
  /// operator with only the columns over B kept (b * P_B)
  LpOperator column_restrict(const Subset& B) const;

  static LpOperator identity(SpacePtr space, double p, int k);

  nlohmann::json to_json() const;
  static LpOperator from_json(SpacePtr space, const nlohmann::json& j);

 private:
  SpacePtr space_;
  double p_;
  int k_;
  std::map<std::pair<int, int>, Block> entries_;
};

struct OpnormOptions {
  double tol = 1e-10;
  uint64_t seed = 0;
  int max_iter = 200000;
};

NormEstimate opnorm(const LpOperator& b, const OpnormOptions& opt = {});

/// Profile entry for R -> nu(R) = sup{ |chi_A b chi_B| : d(A,B) > R }.
struct ProfileEntry {
  double R = 0;
  double value = 0;
  enum class Tag { exact, lower, upper } tag = Tag::exact;
};

struct QuasiLocalityProfile {
  std::vector<ProfileEntry> entries;
};

enum class EpsPropMode { exact_small, bounds };

struct EpsPropResult {
  double lower = 0;
  double upper = 0;
  Subset A, B;  // witness pair attaining (or certifying) the lower bound
};

EpsPropResult eps_propagation(const LpOperator& b, double R, EpsPropMode mode,
                              const OpnormOptions& opt = {});

QuasiLocalityProfile ql_profile(const LpOperator& b, const std::vector<double>& R_grid,
                                const OpnormOptions& opt = {});

LpOperator random_band(SpacePtr space, double p, int k, double r, double density,
                       double magnitude, uint64_t seed);

/// lower shift pattern along a deterministic index chain: block (x+1, x) = 1
/// (unit entries). Displacement bound 1 on path-like spaces.
LpOperator shift_pattern(SpacePtr space, double p, int k);

/// Truncated Neumann series for (Id - lambda a)^{-1} with a certified tail
/// bound (lambda |a|)^{J+1} / (1 - lambda |a|) <= tail_tol.
LpOperator neumann_quasilocal(const LpOperator& a, double lambda, double tail_tol,
                              const OpnormOptions& opt = {});

/// [b, f] = b f - f b; blocks ([b,f])_{xy} = (f(y) - f(x)) b_{xy}.
/// The dual-order convention [f, b] = -[b, f] is fixed here.
LpOperator commutator(const LpOperator& b, const ScalarFunction& f);

LpOperator multiply_left(const ScalarFunction& f, const LpOperator& b);   // f b
LpOperator multiply_right(const LpOperator& b, const ScalarFunction& f);  // b f

struct CommutBound {
  double L = 0;
  std::optional<double> upper;  // certified
  std::optional<double> lower;  // attained by witness_f
  std::optional<ScalarFunction> witness_f;
};

/// Certified upper bound K * mu * L * R for sup over L-Lipschitz contractions
/// of |[b, f]|, where R = propagation(b), mu bounds the block norms and K is
/// the band decomposition count (max nonzero blocks per row/column).
CommutBound commut_bound_band(const LpOperator& b, double L);

/// Adversarial lower bound: tent-function candidates followed by
/// coordinate ascent with Lipschitz-feasibility repair.
CommutBound commut_search(const LpOperator& b, double L, int budget, uint64_t seed);

}  // namespace coarseop
