#pragma once

#include "coarseop/approx.hpp"

namespace coarseop {

enum class SparsifyStrategy { grid_shift, greedy };

/// Disjoint m-separated components of bounded diameter carrying at least a
/// c-fraction of the input mass; success flag is honest (greedy is best-effort).
struct SparsificationResult {
  std::vector<Subset> components;
  int m = 0;            // required separation
  int f = 0;            // schedule box side / diameter cap parameter
  double diameter_bound = 0;  // max measured component diameter
  double fraction = 0;  // captured mass / total mass
  double total_mass = 0;
  bool success = false;  // fraction >= c
};

/// grid_shift: tile by f-boxes alternating with m-corridors, sweep all
/// (f+m)^N shifts, keep the best; f minimal with (f/(f+m))^N >= c, so the
/// averaging bound guarantees success on grids. greedy: grow components from
/// the heaviest points with separation enforced and diameter capped.
SparsificationResult sparsify(const MetricSpace& s, const std::vector<double>& weights, int m,
                              double c, SparsifyStrategy strategy);

struct LocalisationResult {
  Vec v;                     // unit vector, flattened
  double support_diameter = 0;
  double achieved = 0;       // |b v|
  double reference = 0;      // certified lower bound for |b|
  bool sparsify_success = true;
  bool certified = false;    // conclusion inequality asserted
};

/// Exhaustive search over ball windows ball(x, S/2): best norm of b restricted
/// to columns in the window, witness extended by zero.
LocalisationResult onl_search(const LpOperator& b, double S, const OpnormOptions& opt = {});

/// Localise the opnorm witness: weight mu({x}) = |w(x)|^p, sparsify with
/// m = ceil(4/L) and c with M (1-c)^{1/p} < eps, return the best component
/// restriction. Conclusion |bv| >= lower(|b|) - 6 eps is asserted whenever
/// sparsification succeeded and the band commutator certificate for (b, L)
/// is below eps.
LocalisationResult ql_localise(const LpOperator& b, double L, double eps,
                               const OpnormOptions& opt = {});

struct InverseReport {
  double delta = 0;
  double residual = 0;                  // |(Id - delta a) b - Id|
  double a_norm_upper = 0;
  std::vector<ProfileEntry> profile;    // nu_b at integer R
  std::vector<double> envelope;         // Neumann prediction per R
  ApproximationCurve curve;             // truncate method
  std::optional<LpOperator> b;
};

/// b = (Id - delta a)^{-1} by dense solve; quasi-locality profile of the
/// inverse against the geometric Neumann envelope.
InverseReport inverse_experiment(const LpOperator& a, double delta,
                                 const std::vector<double>& eps_grid,
                                 const OpnormOptions& opt = {});

struct PropertyARow {
  double r = 0;       // variation radius / window parameter
  int S = 0;          // partition box side
  double variation = 0;
  double onl_ratio = 0;         // achieved / certified lower norm
  double sparsify_fraction = 0;
};

/// Descriptive sweep: variation-vs-box-side, ONL ratios for a seeded band
/// operator, sparsification fractions. No boolean verdict.
std::vector<PropertyARow> property_a_report(SpacePtr space, const std::vector<double>& r_grid,
                                            const std::vector<int>& S_grid, double p,
                                            uint64_t seed);

}  // namespace coarseop
