#include "coarseop/pnorm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "coarseop/rng.hpp"

namespace coarseop {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool is_inf(double p) { return std::isinf(p); }

double conjugate_exponent(double p) {
  if (p == 1) return kInf;
  if (is_inf(p)) return 1;
  return p / (p - 1);
}

double parse_exponent(const std::string& token) {
  if (token == "inf" || token == "infty" || token == "infinity" || token == "0") return kInf;
  double p = std::stod(token);
  if (p == 0) return kInf;  // p = 0 aliased to infinity on finite sets
  if (p < 1) throw std::invalid_argument("exponent must be in {0} or [1, inf]");
  return p;
}

std::string exponent_token(double p) {
  if (is_inf(p)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", p);
  return buf;
}

double vec_pnorm(const Vec& v, double p) {
  if (is_inf(p)) {
    double m = 0;
    for (const auto& x : v) m = std::max(m, std::abs(x));
    return m;
  }
  if (p == 1) {
    double s = 0;
    for (const auto& x : v) s += std::abs(x);
    return s;
  }
  double s = 0;
  for (const auto& x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

Vec SparseMat::apply(const Vec& x) const {
  Vec y(rows, cpx(0));
  for (size_t t = 0; t < val.size(); ++t) y[ri[t]] += val[t] * x[ci[t]];
  return y;
}

Vec SparseMat::apply_adjoint(const Vec& x) const {
  Vec y(cols, cpx(0));
  for (size_t t = 0; t < val.size(); ++t) y[ci[t]] += std::conj(val[t]) * x[ri[t]];
  return y;
}

std::vector<double> SparseMat::col_abs_sums() const {
  std::vector<double> s(cols, 0.0);
  for (size_t t = 0; t < val.size(); ++t) s[ci[t]] += std::abs(val[t]);
  return s;
}

std::vector<double> SparseMat::row_abs_sums() const {
  std::vector<double> s(rows, 0.0);
  for (size_t t = 0; t < val.size(); ++t) s[ri[t]] += std::abs(val[t]);
  return s;
}

namespace {

NormEstimate zero_estimate(const SparseMat& m) {
  NormEstimate e;
  e.lower = e.upper = 0;
  e.witness.assign(std::max(m.cols, 1), cpx(0));
  e.witness[0] = cpx(1);
  e.method = "zero";
  return e;
}

double max_of(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, x);
  return m;
}

NormEstimate exact_p1(const SparseMat& m) {
  auto cols = m.col_abs_sums();
  int best = 0;
  for (int c = 1; c < m.cols; ++c)
    if (cols[c] > cols[best]) best = c;
  NormEstimate e;
  e.lower = e.upper = cols.empty() ? 0 : cols[best];
  e.witness.assign(m.cols, cpx(0));
  e.witness[best] = cpx(1);
  e.method = "column-sum";
  return e;
}

NormEstimate exact_pinf(const SparseMat& m) {
  auto rows = m.row_abs_sums();
  int best = 0;
  for (int r = 1; r < m.rows; ++r)
    if (rows[r] > rows[best]) best = r;
  NormEstimate e;
  e.lower = e.upper = rows.empty() ? 0 : rows[best];
  // witness: unimodular signs aligned with row `best`; |bv|_inf equals the row sum
  e.witness.assign(m.cols, cpx(0));
  for (size_t t = 0; t < m.val.size(); ++t)
    if (m.ri[t] == best && std::abs(m.val[t]) > 0)
      e.witness[m.ci[t]] = std::conj(m.val[t]) / std::abs(m.val[t]);
  bool any = false;
  for (auto& w : e.witness) any = any || std::abs(w) > 0;
  if (!any) e.witness[0] = cpx(1);
  e.method = "row-sum";
  return e;
}

double interpolation_upper(const SparseMat& m, double p) {
  double n1 = max_of(m.col_abs_sums());
  double ninf = max_of(m.row_abs_sums());
  double q = conjugate_exponent(p);
  return std::pow(n1, 1.0 / p) * std::pow(ninf, 1.0 / q);
}

// |v|_2 and normalization helpers on raw complex vectors
double nrm2(const Vec& v) {
  double s = 0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

void scale(Vec& v, double a) {
  for (auto& x : v) x *= a;
}

NormEstimate spectral(const SparseMat& m, const PnormOptions& opt) {
  NormEstimate e;
  e.method = "power-residual";
  // start: ones + seeded perturbation (avoids an orthogonal start)
  Rng rng(stream_seed(opt.seed, "pnorm.p2.start"));
  Vec v(m.cols);
  for (auto& x : v) x = cpx(1.0 + 0.01 * (rng.next_double() - 0.5),
                            0.01 * (rng.next_double() - 0.5));
  scale(v, 1.0 / nrm2(v));

  double rho = 0, res = kInf;
  auto iterate = [&](Vec& x, int iters) {
    for (int it = 0; it < iters; ++it) {
      Vec hx = m.apply_adjoint(m.apply(x));
      double nn = nrm2(hx);
      if (nn == 0) {
        rho = 0;
        res = 0;
        return;
      }
      scale(hx, 1.0 / nn);
      x = std::move(hx);
      if ((it & 0x3f) == 0x3f || it == iters - 1) {
        Vec hx2 = m.apply_adjoint(m.apply(x));
        double r = 0;
        rho = 0;
        for (size_t i = 0; i < x.size(); ++i) rho += std::real(std::conj(x[i]) * hx2[i]);
        for (size_t i = 0; i < x.size(); ++i) r += std::norm(hx2[i] - rho * x[i]);
        res = std::sqrt(r);
        if (res <= opt.tol * std::max(rho, 1e-300)) return;
      }
    }
  };
  iterate(v, opt.max_iter);

  bool conv = res <= opt.tol * std::max(rho, 1e-300);
  if (!conv && opt.dense_fallback && m.cols <= 768) {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m.cols, m.cols);
    {
      Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(m.rows, m.cols);
      for (size_t t = 0; t < m.val.size(); ++t) A(m.ri[t], m.ci[t]) += m.val[t];
      H = A.adjoint() * A;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    Eigen::VectorXcd top = es.eigenvectors().col(m.cols - 1);
    for (int i = 0; i < m.cols; ++i) v[i] = top(i);
    scale(v, 1.0 / nrm2(v));
    Vec hv = m.apply_adjoint(m.apply(v));
    rho = 0;
    for (size_t i = 0; i < v.size(); ++i) rho += std::real(std::conj(v[i]) * hv[i]);
    double r = 0;
    for (size_t i = 0; i < v.size(); ++i) r += std::norm(hv[i] - rho * v[i]);
    res = std::sqrt(r);
    conv = res <= 1e-8 * std::max(rho, 1e-300);
    e.method = "dense-eig";
  }

  double lower = nrm2(m.apply(v));  // = sqrt(rho) up to rounding, attained by v
  double up_lambda = std::max(rho + res, 0.0);
  double upper = std::sqrt(up_lambda);
  double interp = interpolation_upper(m, 2.0);
  if (!conv) upper = interp;  // flagged: widest certified interval
  upper = std::min(upper, interp);
  upper = std::max(upper, lower);
  e.lower = lower;
  e.upper = upper;
  e.witness = std::move(v);
  e.converged = conv;
  return e;
}

// dual vector: s with <s, y> pairing giving |y|_p and |s|_q = 1
Vec dual_vector(const Vec& y, double p) {
  double np = vec_pnorm(y, p);
  Vec s(y.size(), cpx(0));
  if (np == 0) return s;
  if (p == 1) {
    for (size_t i = 0; i < y.size(); ++i)
      if (std::abs(y[i]) > 0) s[i] = y[i] / std::abs(y[i]);
    return s;
  }
  if (is_inf(p)) {
    // pick one coordinate attaining the max
    size_t best = 0;
    for (size_t i = 1; i < y.size(); ++i)
      if (std::abs(y[i]) > std::abs(y[best])) best = i;
    if (std::abs(y[best]) > 0) s[best] = y[best] / std::abs(y[best]);
    return s;
  }
  double denom = std::pow(np, p - 1);
  for (size_t i = 0; i < y.size(); ++i) {
    double a = std::abs(y[i]);
    if (a > 0) s[i] = std::pow(a, p - 1) / denom * (y[i] / a);
  }
  return s;
}

NormEstimate boyd(const SparseMat& m, double p, const PnormOptions& opt) {
  NormEstimate e;
  e.method = "boyd";
  double q = conjugate_exponent(p);
  double interp = interpolation_upper(m, p);

  std::vector<Vec> starts;
  {
    Vec ones(m.cols, cpx(1));
    starts.push_back(ones);
    // p=1 witness column
    auto cs = m.col_abs_sums();
    int c1 = 0;
    for (int c = 1; c < m.cols; ++c)
      if (cs[c] > cs[c1]) c1 = c;
    Vec ec(m.cols, cpx(0));
    ec[c1] = cpx(1);
    starts.push_back(ec);
    // p=inf witness (sign vector of the heaviest row)
    starts.push_back(exact_pinf(m).witness);
    Rng rng(stream_seed(opt.seed, "pnorm.boyd.start"));
    for (int r = 0; r < opt.restarts; ++r) {
      Vec rv(m.cols);
      for (auto& x : rv) x = cpx(rng.next_double() - 0.5, rng.next_double() - 0.5);
      starts.push_back(std::move(rv));
    }
  }

  double best = 0;
  Vec best_x(m.cols, cpx(0));
  best_x[0] = cpx(1);
  bool conv_any = false;
  for (auto x : starts) {
    double nx = vec_pnorm(x, p);
    if (nx == 0) continue;
    for (auto& t : x) t /= nx;
    double prev = -1;
    for (int it = 0; it < 200; ++it) {
      Vec y = m.apply(x);
      double g = vec_pnorm(y, p);
      if (g == 0) break;
      if (g > best) {
        best = g;
        best_x = x;
      }
      Vec z = m.apply_adjoint(dual_vector(y, p));
      double nzq = vec_pnorm(z, q);
      double zx = 0;
      for (size_t i = 0; i < x.size(); ++i) zx += std::real(std::conj(z[i]) * x[i]);
      if (nzq <= zx * (1 + 1e-12) || std::abs(g - prev) <= 1e-14 * std::max(g, 1.0)) {
        conv_any = true;
        break;
      }
      prev = g;
      x = dual_vector(z, q);
      double nxp = vec_pnorm(x, p);
      if (nxp == 0) break;
      for (auto& t : x) t /= nxp;
    }
  }
  e.lower = best;
  e.upper = std::max(interp, best);
  e.witness = std::move(best_x);
  e.converged = conv_any;
  return e;
}

}  // namespace

NormEstimate pnorm_estimate(const SparseMat& m, double p, const PnormOptions& opt) {
  if (m.rows == 0 || m.cols == 0 || m.val.empty()) return zero_estimate(m);
  if (p == 1) return exact_p1(m);
  if (is_inf(p)) return exact_pinf(m);
  if (p == 2) return spectral(m, opt);
  return boyd(m, p, opt);
}

}  // namespace coarseop
