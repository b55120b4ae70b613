#include "doctest.h"

#include <cmath>

#include "coarseop/locality.hpp"
#include "oracles.hpp"

using namespace coarseop;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double subset_diameter(const MetricSpace& s, const Subset& A) {
  double d = 0;
  for (int x : A)
    for (int y : A) d = std::max(d, s.dist(x, y));
  return d;
}

void check_components(const MetricSpace& s, const SparsificationResult& r) {
  for (size_t i = 0; i < r.components.size(); ++i) {
    CHECK(!r.components[i].empty());
    CHECK(subset_diameter(s, r.components[i]) <= r.diameter_bound + 1e-12);
    for (size_t j = i + 1; j < r.components.size(); ++j)
      CHECK(s.set_distance(r.components[i], r.components[j]) >= r.m);
  }
}

}  // namespace

TEST_CASE("grid shift sparsification on the line") {
  MetricSpace s = MetricSpace::grid(1, 100);
  std::vector<double> w(100, 1.0);
  SparsificationResult r = sparsify(s, w, 2, 0.8, SparsifyStrategy::grid_shift);
  CHECK(r.f == 8);  // least f with f/(f+2) >= 0.8
  CHECK(r.success);
  CHECK(r.fraction >= 0.8);
  CHECK(r.total_mass == 100.0);
  check_components(s, r);
}

TEST_CASE("grid shift sparsification on the square") {
  MetricSpace s = MetricSpace::grid(2, 60);
  std::vector<double> w(s.size(), 1.0);
  SparsificationResult r = sparsify(s, w, 3, 0.5, SparsifyStrategy::grid_shift);
  CHECK(r.f == 8);  // least f with (f/(f+3))^2 >= 0.5
  CHECK(r.success);
  CHECK(r.fraction >= 0.5);
  check_components(s, r);
}

TEST_CASE("an atom is always captured") {
  MetricSpace s = MetricSpace::grid(1, 50);
  std::vector<double> w(50, 0.0);
  w[17] = 3.0;
  for (auto strat : {SparsifyStrategy::grid_shift, SparsifyStrategy::greedy}) {
    SparsificationResult r = sparsify(s, w, 4, 0.99, strat);
    CHECK(r.success);
    CHECK(r.fraction == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("greedy sparsification reports honestly") {
  MetricSpace s = MetricSpace::path(30);
  std::vector<double> w(30, 1.0);
  w[5] = 5.0;
  w[20] = 4.0;
  SparsificationResult r = sparsify(s, w, 3, 0.4, SparsifyStrategy::greedy);
  check_components(s, r);
  double mass = 0;
  for (const auto& comp : r.components)
    for (int x : comp) mass += w[x];
  CHECK(r.total_mass == 37.0);
  CHECK(r.fraction == doctest::Approx(mass / r.total_mass).epsilon(1e-14));
  CHECK(r.success == (r.fraction >= 0.4));
}

TEST_CASE("sparsify input validation") {
  MetricSpace s = MetricSpace::grid(1, 10);
  std::vector<double> w(10, 1.0);
  CHECK_THROWS(sparsify(s, w, 0, 0.5, SparsifyStrategy::grid_shift));
  CHECK_THROWS(sparsify(s, w, 2, 0.0, SparsifyStrategy::grid_shift));
  CHECK_THROWS(sparsify(s, w, 2, 1.5, SparsifyStrategy::grid_shift));
  std::vector<double> bad(10, 1.0);
  bad[3] = -1;
  CHECK_THROWS(sparsify(s, bad, 2, 0.5, SparsifyStrategy::grid_shift));
  MetricSpace p = MetricSpace::path(10);
  CHECK_THROWS(sparsify(p, w, 2, 0.5, SparsifyStrategy::grid_shift));  // needs a grid
}

TEST_CASE("f at the window size gives one whole-space component") {
  MetricSpace s = MetricSpace::grid(1, 6);
  std::vector<double> w(6, 1.0);
  SparsificationResult r = sparsify(s, w, 1, 1.0, SparsifyStrategy::grid_shift);
  REQUIRE(r.components.size() == 1);
  CHECK(r.components[0].size() == 6);
  CHECK(r.fraction == 1.0);
}

TEST_CASE("onl search on a diagonal operator") {
  auto s = std::make_shared<MetricSpace>(MetricSpace::path(12));
  LpOperator b(s, 2, 1);
  for (int x = 0; x < 12; ++x) b.set_block(x, x, {cpx(0.1 * (x + 1))});
  LocalisationResult r = onl_search(b, 0.0);
  CHECK(r.support_diameter == 0.0);
  CHECK(r.achieved == doctest::Approx(1.2).epsilon(1e-9));
  CHECK(r.achieved >= r.reference - 1e-9);
  CHECK(vec_pnorm(r.v, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  double applied = vec_pnorm(b.apply(r.v), 2.0);
  CHECK(applied == doctest::Approx(r.achieved).epsilon(1e-12));
}

TEST_CASE("onl ratio improves with the window size") {
  auto s = std::make_shared<MetricSpace>(MetricSpace::grid(1, 40));
  LpOperator b = random_band(s, 2, 1, 1.0, 0.9, 1.0, 14);
  double prev = 0;
  for (double S : {0.0, 2.0, 6.0, 80.0}) {
    LocalisationResult r = onl_search(b, S);
    CHECK(r.achieved >= prev - 1e-8);
    CHECK(r.support_diameter <= S);
    prev = r.achieved;
  }
  // the full window recovers the certified lower bound
  LocalisationResult full = onl_search(b, 2.0 * s->diameter());
  CHECK(full.achieved == doctest::Approx(opnorm(b).lower).epsilon(1e-9));
}

TEST_CASE("ql localise on a certified band instance") {
  auto s = std::make_shared<MetricSpace>(MetricSpace::grid(1, 100));
  LpOperator raw = random_band(s, 2, 1, 1.0, 0.9, 1.0, 25);
  LpOperator b = raw.scaled(cpx(1.0 / opnorm(raw).upper));
  double eps = 0.2;
  double L = 0.99 * eps / commut_bound_band(b, 1.0).upper.value();
  LocalisationResult r = ql_localise(b, L, eps);
  CHECK(r.sparsify_success);
  CHECK(r.certified);
  CHECK(vec_pnorm(r.v, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.achieved >= r.reference - 6 * eps - 1e-9);
  CHECK(r.support_diameter <= s->diameter());
}

TEST_CASE("ql localise never certifies at p = inf") {
  auto s = std::make_shared<MetricSpace>(MetricSpace::grid(1, 40));
  LpOperator b = random_band(s, kInf, 1, 1.0, 0.9, 1.0, 26);
  LocalisationResult r = ql_localise(b, 0.05, 0.5);
  CHECK(!r.certified);
  CHECK(vec_pnorm(r.v, kInf) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inverse experiment: delta = 0 returns the identity") {
  auto s = std::make_shared<MetricSpace>(MetricSpace::path(15));
  LpOperator a = shift_pattern(s, 2, 1);
  InverseReport rep = inverse_experiment(a, 0.0, {0.5});
  CHECK(rep.residual <= 1e-12);
  REQUIRE(rep.b);
  CHECK((oracles::dense_of(*rep.b) - Eigen::MatrixXcd::Identity(15, 15)).cwiseAbs().maxCoeff() <=
        1e-12);
  for (const auto& e : rep.profile) CHECK(e.value <= 1e-12);
}

TEST_CASE("inverse experiment: shift at delta = 0.3 tracks the Neumann envelope") {
  auto s = std::make_shared<MetricSpace>(MetricSpace::path(40));
  LpOperator a = shift_pattern(s, 1, 1);
  InverseReport rep = inverse_experiment(a, 0.3, {0.5, 0.1});
  CHECK(rep.residual <= 1e-10);
  CHECK(rep.a_norm_upper == doctest::Approx(1.0).epsilon(1e-9));
  REQUIRE(rep.profile.size() == rep.envelope.size());
  for (size_t i = 0; i < rep.profile.size(); ++i)
    CHECK(rep.profile[i].value <= rep.envelope[i] + 1e-9);
  REQUIRE(rep.curve.rows.size() == 2);
  CHECK(rep.curve.rows[1].defect <= 0.1);
  CHECK(rep.curve.rows[1].achieved);
}

TEST_CASE("property A sweep produces one row per cell") {
  auto s = std::make_shared<MetricSpace>(MetricSpace::grid(1, 30));
  auto rows = property_a_report(s, {1.0, 2.0}, {5, 10}, 2.0, 99);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CHECK(row.variation >= 0);
    CHECK(row.onl_ratio > 0);
    CHECK(row.onl_ratio <= 1 + 1e-9);
    CHECK(row.sparsify_fraction >= 0);
    CHECK(row.sparsify_fraction <= 1 + 1e-12);
  }
  // variation at fixed r decreases with the box side
  for (int i : {0, 1}) CHECK(rows[2 + i].variation <= rows[i].variation + 1e-12);
}
