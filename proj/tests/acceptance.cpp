// Acceptance gate: one self-contained check per criterion, one line of output
// each. Exit status is nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "coarseop/engine.hpp"
#include "coarseop/rng.hpp"
#include "oracles.hpp"

using namespace coarseop;
namespace fs = std::filesystem;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Check {
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
  void expect(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

bool is_partial_injection(const PartialTranslation& t) {
  std::vector<int> dom, ran;
  for (auto [x, y] : t.pairs) {
    dom.push_back(x);
    ran.push_back(y);
  }
  std::sort(dom.begin(), dom.end());
  std::sort(ran.begin(), ran.end());
  return std::adjacent_find(dom.begin(), dom.end()) == dom.end() &&
         std::adjacent_find(ran.begin(), ran.end()) == ran.end();
}

double subset_diameter(const MetricSpace& s, const Subset& A) {
  double d = 0;
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = i + 1; j < A.size(); ++j) d = std::max(d, s.dist(A[i], A[j]));
  return d;
}

// ---- criterion 1: exact band reconstruction on random geometric spaces ----
Check criterion1() {
  Check c;
  auto t0 = std::chrono::steady_clock::now();
  int spaces = 0, ops = 0;
  uint64_t seed = 0;
  while (spaces < 10 && c.ok) {
    ++seed;
    SpacePtr s;
    try {
      s = std::make_shared<MetricSpace>(MetricSpace::random_geometric(200, 0.2, 2, seed));
    } catch (const std::invalid_argument&) {
      continue;  // disconnected sample; move to the next seed
    }
    ++spaces;
    for (int j = 0; j < 10 && c.ok; ++j) {
      double r = 1.0 + (j % 2);
      LpOperator b = random_band(s, 2, 1, r, 0.6, 1.0, 1000 * seed + j);
      BandDecomposition dec = band_decompose(b);
      c.expect(static_cast<int>(dec.parts.size()) <= s->geometry_profile(r),
               "part count exceeds the geometry profile");
      for (const auto& part : dec.parts) {
        c.expect(is_partial_injection(part.translation), "translation is not injective");
        c.expect(part.translation.displacement <= r + 1e-12, "displacement exceeds the band");
      }
      double diff =
          (oracles::dense_of(rebuild(dec, s, 2)) - oracles::dense_of(b)).cwiseAbs().maxCoeff();
      c.expect(diff <= 1e-12, "reconstruction error " + std::to_string(diff));
      ++ops;
    }
  }
  c.expect(ops == 100, "expected 100 operators, decomposed " + std::to_string(ops));
  double secs = seconds_since(t0);
  c.expect(secs < 10.0, "runtime " + std::to_string(secs) + "s exceeds 10s");
  return c;
}

// ---- criterion 2: corner-norm profile vs the exhaustive oracle ----
Check criterion2() {
  Check c;
  auto t0 = std::chrono::steady_clock::now();
  std::vector<SpacePtr> spaces = {
      std::make_shared<MetricSpace>(MetricSpace::cycle(9)),
      std::make_shared<MetricSpace>(MetricSpace::path(12)),
      std::make_shared<MetricSpace>(MetricSpace::grid(2, 3)),
      std::make_shared<MetricSpace>(MetricSpace::tree(2, 2)),
  };
  const double ps[3] = {1.0, 2.0, kInf};
  for (int i = 0; i < 50 && c.ok; ++i) {
    double p = ps[i % 3];
    SpacePtr s = spaces[i % 4];
    LpOperator b = random_band(s, p, 1, 1.0 + (i % 2), 0.7, 1.0, 500 + i);
    for (double R : {0.0, 1.0, 2.0}) {
      double ref = oracles::eps_prop_exhaustive(b, R);
      EpsPropResult got = eps_propagation(b, R, EpsPropMode::bounds);
      if (p == 2.0) {
        c.expect(got.lower <= ref + 1e-9 && got.upper >= ref - 1e-9,
                 "p=2 interval misses the oracle at instance " + std::to_string(i));
      } else {
        double tol = 1e-12 * std::max(1.0, ref);
        c.expect(std::abs(got.lower - ref) <= tol && std::abs(got.upper - ref) <= tol,
                 "p in {1,inf} value differs from the oracle at instance " + std::to_string(i));
      }
    }
  }
  double secs = seconds_since(t0);
  c.expect(secs < 120.0, "runtime " + std::to_string(secs) + "s exceeds 2min");
  return c;
}

// ---- criterion 3: norm sandwich against a grid-search oracle ----
Check criterion3() {
  Check c;
  for (uint64_t seed = 1; seed <= 100 && c.ok; ++seed) {
    Rng rng(stream_seed(seed, "acceptance.norm-sandwich"));
    SparseMat m;
    m.rows = m.cols = 30;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(30, 30);
    for (int r = 0; r < 30; ++r)
      for (int col = 0; col < 30; ++col)
        if (rng.bernoulli(0.3)) {
          cpx v(2 * rng.next_double() - 1, 2 * rng.next_double() - 1);
          m.add(r, col, v);
          A(r, col) = v;
        }
    for (double p : {1.0, 2.0, kInf}) {
      NormEstimate e = pnorm_estimate(m, p);
      c.expect(e.upper - e.lower <= 1e-8,
               "gap " + std::to_string(e.upper - e.lower) + " at p=" + exponent_token(p));
    }
    // real 4x4 sub-instance for the general-p oracle
    Eigen::MatrixXd A4 = A.block(0, 0, 4, 4).real();
    SparseMat sub;
    sub.rows = sub.cols = 4;
    for (int r = 0; r < 4; ++r)
      for (int col = 0; col < 4; ++col)
        if (A4(r, col) != 0) sub.add(r, col, cpx(A4(r, col)));
    for (double p : {1.5, 3.0}) {
      NormEstimate e = pnorm_estimate(sub, p);
      double oracle = oracles::grid_search_pnorm(A4, p);
      c.expect(e.lower <= oracle + 1e-6 && oracle <= e.upper + 1e-9,
               "oracle " + std::to_string(oracle) + " outside [" + std::to_string(e.lower) +
                   ", " + std::to_string(e.upper) + "] at p=" + std::to_string(p) + " seed " +
                   std::to_string(seed));
    }
  }
  return c;
}

// ---- criterion 4: end-point defect certificate on interval partitions ----
Check criterion4() {
  Check c;
  auto s = std::make_shared<MetricSpace>(MetricSpace::path(500));
  for (double p : {1.0, kInf}) {
    LpOperator b = neumann_quasilocal(shift_pattern(s, p, 1), 0.3, 1e-10);
    for (double L : {0.5, 0.2, 0.1}) {
      double defect10 = -1, defect50 = -1;
      for (int len : {10, 25, 50}) {
        Cover cov;
        for (int start = 0; start < 500; start += len) {
          Subset cell;
          for (int x = start; x < std::min(start + len, 500); ++x) cell.push_back(x);
          cov.members.push_back(std::move(cell));
        }
        cov.diameter_bound = len - 1;
        cov.multiplicity = 1;
        PartitionOfUnity pou = pou_from_cover(*s, cov, p);
        DualFamily dual = dual_family(*s, pou, L);
        DefectCertificate cert = defect_certificate_end(b, pou, dual);
        c.expect(cert.defect <= cert.bound + 1e-12,
                 "defect exceeds certificate at len=" + std::to_string(len) +
                     " L=" + std::to_string(L) + " p=" + exponent_token(p));
        if (len == 10) defect10 = cert.defect;
        if (len == 50) defect50 = cert.defect;
      }
      c.expect(defect50 <= defect10 + 1e-12, "defect not improved by longer intervals at L=" +
                                                 std::to_string(L) + " p=" + exponent_token(p));
    }
  }
  return c;
}

// ---- criterion 5: quantitative mid approximation schedule ----
Check criterion5() {
  Check c;
  auto t0 = std::chrono::steady_clock::now();
  auto s = std::make_shared<MetricSpace>(MetricSpace::grid(2, 40));
  LpOperator raw = random_band(s, 2, 1, 1.0, 0.9, 1.0, 7);
  LpOperator b = raw.scaled(cpx(1.0 / opnorm(raw).upper));
  MidPipelineReport rep = mid_pipeline(b, 0.2);
  c.expect(rep.defect <= 0.2, "defect " + std::to_string(rep.defect) + " exceeds 0.2");
  c.expect(rep.approx_norm <= 1 + 1e-8,
           "approximant norm " + std::to_string(rep.approx_norm) + " exceeds 1 + 1e-8");
  double secs = seconds_since(t0);
  c.expect(secs < 60.0, "runtime " + std::to_string(secs) + "s exceeds 1min");
  return c;
}

// ---- criterion 6: cutdown halo estimate on separated families ----
Check criterion6() {
  Check c;
  auto s = std::make_shared<MetricSpace>(MetricSpace::path(60));
  const double ps[3] = {1.0, 2.0, kInf};
  for (int i = 0; i < 50 && c.ok; ++i) {
    double r = 1.0 + (i % 2);
    LpOperator b = random_band(s, ps[i % 3], 1, r, 0.8, 1.0, 900 + i);
    // alternate wide gaps (no crossings) and tight gaps (crossings present)
    double L = (i % 2 == 0) ? 0.5 : 2.0;
    int len = (i % 2 == 0) ? 5 : 3;
    int stride = (i % 2 == 0) ? 11 : 4;  // gap 6 > 4 = 2/L resp. gap 2 > 1 = 2/L
    std::vector<ScalarFunction> fam;
    for (int start = 0; start + len <= 60; start += stride) {
      Subset sup;
      for (int x = start; x < start + len; ++x) sup.push_back(x);
      fam.push_back(ScalarFunction::characteristic(60, sup));
    }
    HaloCheck hc = halo_estimate_check(b, fam, L);
    c.expect(hc.lhs <= hc.rhs + 1e-8, "halo value " + std::to_string(hc.lhs) +
                                          " exceeds certificate " + std::to_string(hc.rhs) +
                                          " at instance " + std::to_string(i));
  }
  return c;
}

// ---- criterion 7: norm localisation end-to-end on the line ----
Check criterion7() {
  Check c;
  auto s = std::make_shared<MetricSpace>(MetricSpace::grid(1, 500));
  const double eps = 0.05;
  for (int i = 0; i < 50 && c.ok; ++i) {
    LpOperator raw = random_band(s, 2, 1, 1.0, 0.9, 1.0, 1300 + i);
    LpOperator b = raw.scaled(cpx(1.0 / opnorm(raw).upper));
    double L = eps / commut_bound_band(b, 1.0).upper.value();
    LocalisationResult res = ql_localise(b, L, eps);
    c.expect(res.sparsify_success, "sparsification failed at instance " + std::to_string(i));
    c.expect(res.support_diameter <= s->diameter(),
             "support diameter exceeds the schedule at instance " + std::to_string(i));
    c.expect(res.achieved >= res.reference - 6 * eps - 1e-9,
             "localised norm " + std::to_string(res.achieved) + " below reference - 0.3 at " +
                 std::to_string(i));
  }
  return c;
}

// ---- criterion 8: sparsification averaging guarantee on grids ----
Check criterion8() {
  Check c;
  for (int dim : {1, 2}) {
    int side = dim == 1 ? 60 : 40;
    MetricSpace s = MetricSpace::grid(dim, side);
    for (int m : {2, 3}) {
      for (double cc : {0.5, 0.8}) {
        for (int wkind = 0; wkind < 3; ++wkind) {
          std::vector<double> w(s.size(), 1.0);
          if (wkind == 1) {
            Rng rng(stream_seed(100 * dim + 10 * m + wkind, "acceptance.sparsify-weights"));
            for (auto& v : w) v = rng.next_double();
          } else if (wkind == 2) {
            std::fill(w.begin(), w.end(), 0.0);
            w[s.size() / 2] = 1.0;
          }
          SparsificationResult r = sparsify(s, w, m, cc, SparsifyStrategy::grid_shift);
          double guarantee = std::pow(static_cast<double>(r.f) / (r.f + m), dim);
          std::string cell = " at dim=" + std::to_string(dim) + " m=" + std::to_string(m) +
                             " c=" + std::to_string(cc) + " w=" + std::to_string(wkind);
          c.expect(guarantee >= cc - 1e-12, "schedule bound below c" + cell);
          c.expect(r.fraction + 1e-12 >= guarantee, "fraction below the averaging bound" + cell);
          c.expect(r.success, "success flag not set" + cell);
          for (size_t a = 0; a < r.components.size(); ++a) {
            c.expect(subset_diameter(s, r.components[a]) <= dim * (r.f - 1) + 1e-12,
                     "component diameter exceeds the box bound" + cell);
            for (size_t bdx = a + 1; bdx < r.components.size(); ++bdx)
              c.expect(s.set_distance(r.components[a], r.components[bdx]) >= m,
                       "components closer than m" + cell);
          }
        }
      }
    }
  }
  return c;
}

// ---- criterion 9: quasi-locality of a Neumann inverse ----
Check criterion9() {
  Check c;
  auto s = std::make_shared<MetricSpace>(MetricSpace::path(300));
  for (double p : {1.0, kInf}) {
    LpOperator a = shift_pattern(s, p, 1);
    InverseReport rep = inverse_experiment(a, 0.3, {0.5, 0.1});
    c.expect(rep.residual <= 1e-10, "residual " + std::to_string(rep.residual));
    c.expect(rep.profile.size() == 20, "expected the profile at R = 1..20");
    for (const auto& e : rep.profile) {
      c.expect(e.tag == ProfileEntry::Tag::exact, "profile not exact at p=" + exponent_token(p));
      c.expect(e.value <= std::pow(0.3, e.R) / 0.7 + 1e-12,
               "profile exceeds the geometric envelope at R=" + std::to_string(e.R));
    }
    bool found = false;
    for (const auto& row : rep.curve.rows)
      if (row.eps == 0.1) {
        found = true;
        c.expect(row.achieved && row.defect <= 0.1 && row.R <= 15,
                 "truncation does not reach defect 0.1 by R = 15");
      }
    c.expect(found, "missing the eps = 0.1 row");
  }
  return c;
}

// ---- criterion 10: byte-identical reports across job counts ----
Check criterion10() {
  Check c;
  const char* bin = std::getenv("COARSE_OP_BIN");
  if (!bin) {
    c.fail("COARSE_OP_BIN not set");
    return c;
  }
  fs::path work = fs::temp_directory_path() / "coarseop-acceptance-determinism";
  fs::remove_all(work);
  fs::create_directories(work);
  nlohmann::json cfg = {
      {"experiment", "onl"},
      {"space", {{"type", "grid"}, {"params", {{"dim", 1}, {"side", 40}}}}},
      {"operator", {{"type", "random_band"}, {"p", 2.0}, {"r", 1.0}, {"density", 0.9}}},
      {"params", {{"S_grid", {0.0, 2.0, 4.0, 8.0}}}},
      {"seed", 11},
  };
  fs::path cfg_path = work / "config.json";
  std::ofstream(cfg_path) << cfg.dump(2) << "\n";
  auto run_cli = [&](const std::string& out, int jobs) {
    std::string cmd = std::string("\"") + bin + "\" run --config " + cfg_path.string() +
                      " --out " + out + " --jobs " + std::to_string(jobs);
    return std::system(cmd.c_str());
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  c.expect(run_cli((work / "j1").string(), 1) == 0, "jobs=1 run failed");
  c.expect(run_cli((work / "j4").string(), 4) == 0, "jobs=4 run failed");
  c.expect(run_cli((work / "j1b").string(), 1) == 0, "jobs=1 rerun failed");
  if (!c.ok) return c;
  std::string a = slurp(work / "j1" / "report.csv");
  c.expect(!a.empty(), "empty report");
  c.expect(a == slurp(work / "j4" / "report.csv"), "reports differ across job counts");
  c.expect(a == slurp(work / "j1b" / "report.csv"), "reports differ across reruns");
  return c;
}

}  // namespace

int main() {
  struct Entry {
    int num;
    const char* name;
    Check (*fn)();
  };
  const Entry entries[] = {
      {1, "band decomposition reconstructs exactly", criterion1},
      {2, "corner norms agree with the exhaustive oracle", criterion2},
      {3, "norm estimates sandwich the grid-search oracle", criterion3},
      {4, "end approximant defect stays under its certificate", criterion4},
      {5, "mid approximation schedule meets the target", criterion5},
      {6, "cutdown halo estimate holds on separated families", criterion6},
      {7, "norm localisation succeeds end-to-end", criterion7},
      {8, "grid sparsification meets the averaging guarantee", criterion8},
      {9, "Neumann inverse is quasi-local with geometric profile", criterion9},
      {10, "reports are byte-identical across job counts", criterion10},
  };
  int failures = 0;
  for (const auto& e : entries) {
    Check c;
    try {
      c = e.fn();
    } catch (const std::exception& ex) {
      c.fail(std::string("exception: ") + ex.what());
    }
    if (c.ok) {
      std::cout << "[PASS] criterion " << e.num << ": " << e.name << "\n";
    } else {
      std::cout << "[FAIL] criterion " << e.num << ": " << e.name << " — " << c.detail << "\n";
      ++failures;
    }
    std::cout.flush();
  }
  return failures == 0 ? 0 : 1;
}
