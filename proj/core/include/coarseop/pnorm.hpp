#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace coarseop {

using cpx = std::complex<double>;
using Vec = std::vector<cpx>;

/// Exponent handling: p is a double in [1, inf]; infinity() denotes l^infty.
/// The token "0" is accepted by parsers as an alias of infinity (on a finite
/// set, c_0 = l^infty).
double conjugate_exponent(double p);
bool is_inf(double p);
double parse_exponent(const std::string& token);
std::string exponent_token(double p);

double vec_pnorm(const Vec& v, double p);

/// Certified interval for an operator p-norm. `lower` is always the value
/// attained by `witness` (unit p-norm), so it is a true lower bound.
/// `upper` is a certified upper bound; for p in {1, inf} lower == upper.
struct NormEstimate {
  double lower = 0;
  double upper = 0;
  Vec witness;
  std::string method;
  bool converged = true;  // false: widest certified interval, flagged
};

/// Flattened sparse complex matrix (triplets). Both LpOperator kernels and
/// row/column restrictions reduce to this before norm estimation.
struct SparseMat {
  int rows = 0;
  int cols = 0;
  std::vector<int> ri, ci;
  std::vector<cpx> val;

  void add(int r, int c, cpx v) {
    ri.push_back(r);
    ci.push_back(c);
    val.push_back(v);
  }
  Vec apply(const Vec& x) const;
  Vec apply_adjoint(const Vec& x) const;
  std::vector<double> col_abs_sums() const;
  std::vector<double> row_abs_sums() const;
};

struct PnormOptions {
  double tol = 1e-10;
  int max_iter = 200000;
  int restarts = 3;          // extra start vectors for the p-power method
  uint64_t seed = 0;         // start-vector perturbation stream
  bool dense_fallback = true;  // p=2: dense eigensolver when power iteration stalls
};

/// p=1 and p=inf: exact (column/row sums). p=2: power iteration on b*b with
/// a residual-certified upper bound (dense eigensolver fallback on small
/// kernels). Other p: lower from a Boyd-style p-norm power iteration, upper
/// from the Riesz-Thorin interpolation bound |b|_p <= |b|_1^{1/p} |b|_inf^{1/q}.
NormEstimate pnorm_estimate(const SparseMat& m, double p, const PnormOptions& opt = {});

}  // namespace coarseop
