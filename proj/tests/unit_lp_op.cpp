#include "doctest.h"

#include <cmath>

#include "coarseop/lp_op.hpp"
#include "coarseop/rng.hpp"
#include "oracles.hpp"

using namespace coarseop;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

SpacePtr path_space(int n) { return std::make_shared<MetricSpace>(MetricSpace::path(n)); }

Vec random_vec(int n, uint64_t seed) {
  Rng rng(stream_seed(seed, "test.vec"));
  Vec v(n);
  for (auto& x : v) x = cpx(2 * rng.next_double() - 1, 2 * rng.next_double() - 1);
  return v;
}

}  // namespace

TEST_CASE("apply and compose match dense linear algebra") {
  auto s = path_space(12);
  LpOperator a = random_band(s, 2, 2, 3.0, 0.7, 1.0, 11);
  LpOperator b = random_band(s, 2, 2, 2.0, 0.7, 1.0, 12);

  Vec v = random_vec(a.dim(), 5);
  Eigen::MatrixXcd Ad = oracles::dense_of(a), Bd = oracles::dense_of(b);
  Eigen::VectorXcd ref = Ad * oracles::to_eigen(v);
  Vec got = a.apply(v);
  for (int i = 0; i < a.dim(); ++i) CHECK(std::abs(got[i] - ref(i)) < 1e-12);

  Eigen::MatrixXcd Cd = oracles::dense_of(a.compose(b));
  Eigen::MatrixXcd refC = Ad * Bd;
  CHECK((Cd - refC).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXcd Sd = oracles::dense_of(a.add(b, cpx(2, 0), cpx(0, -1)));
  CHECK((Sd - (2.0 * Ad - cpx(0, 1) * Bd)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("propagation and band truncation") {
  auto s = path_space(10);
  LpOperator b(s, 2, 1);
  b.set_block(0, 0, {cpx(1)});
  b.set_block(2, 7, {cpx(0.5)});
  CHECK(b.propagation() == 5);
  LpOperator t = b.band_truncate(3);
  CHECK(t.propagation() == 0);
  CHECK(t.blocks().size() == 1);
  CHECK(b.band_truncate(5).blocks().size() == 2);
}

TEST_CASE("zero blocks are never stored") {
  auto s = path_space(4);
  LpOperator b(s, 2, 1);
  b.set_block(0, 1, {cpx(0)});
  CHECK(b.blocks().empty());
  b.set_block(0, 1, {cpx(1)});
  b.add_to_block(0, 1, {cpx(-1)});
  CHECK(b.blocks().empty());
}

TEST_CASE("single far entry eps-propagation") {
  auto s = path_space(10);
  LpOperator b(s, 2, 1);
  b.set_block(2, 7, {cpx(0.5)});
  for (auto mode : {EpsPropMode::exact_small, EpsPropMode::bounds}) {
    auto r4 = eps_propagation(b, 4, mode);
    CHECK(r4.lower == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r4.upper == doctest::Approx(0.5).epsilon(1e-12));
    auto r5 = eps_propagation(b, 5, mode);
    CHECK(r5.upper == 0.0);
  }
}

TEST_CASE("bounds mode equals the exhaustive oracle for p in {1, inf}") {
  for (uint64_t seed : {21, 22, 23}) {
    auto s = std::make_shared<MetricSpace>(MetricSpace::cycle(9));
    for (double p : {1.0, kInf}) {
      LpOperator b = random_band(s, p, 1, 3.0, 0.6, 1.0, seed);
      for (double R : {0.0, 1.0, 2.0, 3.0}) {
        double ref = oracles::eps_prop_exhaustive(b, R);
        auto got = eps_propagation(b, R, EpsPropMode::bounds);
        CHECK(got.lower == doctest::Approx(ref).epsilon(1e-12));
        CHECK(got.upper == doctest::Approx(ref).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("bounds mode brackets the oracle for p = 2") {
  auto s = std::make_shared<MetricSpace>(MetricSpace::cycle(8));
  for (uint64_t seed : {31, 32}) {
    LpOperator b = random_band(s, 2, 1, 2.0, 0.7, 1.0, seed);
    for (double R : {0.0, 1.0, 2.0}) {
      double ref = oracles::eps_prop_exhaustive(b, R);
      auto got = eps_propagation(b, R, EpsPropMode::bounds);
      CHECK(got.lower <= ref + 1e-9);
      CHECK(got.upper >= ref - 1e-9);
    }
  }
}

TEST_CASE("ql profile is monotone") {
  auto s = path_space(20);
  LpOperator b = random_band(s, 1, 1, 4.0, 0.8, 1.0, 9);
  auto prof = ql_profile(b, {0, 1, 2, 3, 4, 5});
  double prev = kInf;
  for (const auto& e : prof.entries) {
    CHECK(e.tag == ProfileEntry::Tag::exact);
    CHECK(e.value <= prev + 1e-12);
    prev = e.value;
  }
}

TEST_CASE("commutator matches the dense bracket") {
  auto s = path_space(8);
  LpOperator b = random_band(s, 2, 1, 2.0, 0.8, 1.0, 17);
  ScalarFunction f = ScalarFunction::tent(*s, {3}, 0.4);
  Eigen::MatrixXcd Bd = oracles::dense_of(b);
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(8, 8);
  for (int x = 0; x < 8; ++x) F(x, x) = f.values[x];
  Eigen::MatrixXcd ref = Bd * F - F * Bd;  // [b, f] = bf - fb
  CHECK((oracles::dense_of(commutator(b, f)) - ref).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("multiplier helpers") {
  auto s = path_space(6);
  LpOperator b = random_band(s, 2, 1, 2.0, 0.9, 1.0, 3);
  ScalarFunction f = ScalarFunction::characteristic(6, {0, 1, 2});
  auto fb = oracles::dense_of(multiply_left(f, b));
  auto bf = oracles::dense_of(multiply_right(b, f));
  auto Bd = oracles::dense_of(b);
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(6, 6);
  for (int x = 0; x < 3; ++x) F(x, x) = 1;
  CHECK((fb - F * Bd).cwiseAbs().maxCoeff() == 0);
  CHECK((bf - Bd * F).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("neumann series carries a residual certificate") {
  auto s = path_space(30);
  LpOperator a = shift_pattern(s, 1, 1);
  double lambda = 0.3, tol = 1e-10;
  LpOperator inv = neumann_quasilocal(a, lambda, tol);
  LpOperator id = LpOperator::identity(s, 1, 1);
  LpOperator res = id.add(a, cpx(1), cpx(-lambda)).compose(inv).add(id, cpx(1), cpx(-1));
  double na = opnorm(a).upper;
  CHECK(opnorm(res).upper <= tol * (1 + lambda * na) + 1e-15);
  CHECK_THROWS(neumann_quasilocal(a, 1.5, tol));  // contraction violated
}

TEST_CASE("band commutator certificate dominates the adversarial search") {
  auto s = path_space(20);
  for (uint64_t seed : {41, 42}) {
    LpOperator b = random_band(s, 2, 1, 2.0, 0.7, 1.0, seed);
    double L = 0.25;
    CommutBound upper = commut_bound_band(b, L);
    CommutBound lower = commut_search(b, L, 60, seed);
    REQUIRE(upper.upper);
    REQUIRE(lower.lower);
    CHECK(*lower.lower <= *upper.upper + 1e-9);
    REQUIRE(lower.witness_f);
    CHECK(lipschitz_constant(*s, *lower.witness_f) <= L + 1e-12);
  }
}

TEST_CASE("random band determinism and shape") {
  auto s = path_space(15);
  LpOperator a = random_band(s, 2, 2, 2.0, 0.5, 1.0, 77);
  LpOperator b = random_band(s, 2, 2, 2.0, 0.5, 1.0, 77);
  CHECK(a.blocks() == b.blocks());
  CHECK(a.propagation() <= 2.0);
  LpOperator c = random_band(s, 2, 2, 2.0, 0.5, 1.0, 78);
  CHECK(a.blocks() != c.blocks());
}

TEST_CASE("operator json round trip") {
  auto s = path_space(7);
  LpOperator b = random_band(s, 1.5, 2, 2.0, 0.8, 1.0, 5);
  LpOperator c = LpOperator::from_json(s, b.to_json());
  CHECK(b.blocks() == c.blocks());
  CHECK(b.p() == c.p());
  CHECK(b.fiber_dim() == c.fiber_dim());
}

TEST_CASE("exact_small guards its domain") {
  auto s = std::make_shared<MetricSpace>(MetricSpace::path(25));
  LpOperator b = random_band(s, 2, 1, 1.0, 0.9, 1.0, 1);
  CHECK_THROWS(eps_propagation(b, 1, EpsPropMode::exact_small));
  auto s2 = path_space(6);
  LpOperator c = random_band(s2, 1.5, 1, 1.0, 0.9, 1.0, 1);
  CHECK_THROWS(eps_propagation(c, 1, EpsPropMode::exact_small));
}
