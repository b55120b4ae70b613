#include "coarseop/engine.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "coarseop/rng.hpp"

namespace coarseop {

namespace {

const std::vector<std::string> kKinds = {"norms",    "approx",  "onl",
                                         "qlocalise", "sparsify", "inverse",
                                         "property-a-sweep"};

double json_exponent(const nlohmann::json& j) {
  double p = j.is_string() ? parse_exponent(j.get<std::string>()) : j.get<double>();
  if (p == 0) p = std::numeric_limits<double>::infinity();
  return p;
}

std::string tag_name(ProfileEntry::Tag t) {
  switch (t) {
    case ProfileEntry::Tag::exact: return "exact";
    case ProfileEntry::Tag::lower: return "lower";
    default: return "upper";
  }
}

std::string method_name(ApproxMethod m) {
  switch (m) {
    case ApproxMethod::truncate: return "truncate";
    case ApproxMethod::pou_end: return "pou_end";
    default: return "pou_mid";
  }
}

ApproxMethod method_from_name(const std::string& s) {
  if (s == "truncate") return ApproxMethod::truncate;
  if (s == "pou_end") return ApproxMethod::pou_end;
  if (s == "pou_mid") return ApproxMethod::pou_mid;
  throw std::invalid_argument("unknown approximation method: " + s);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.kind = j.at("experiment").get<std::string>();
  cfg.space_spec = j.at("space");
  if (j.contains("operator")) cfg.op_spec = j.at("operator");
  if (j.contains("params")) cfg.params = j.at("params");
  if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
  if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
  if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<int>();
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = kind;
  j["space"] = space_spec;
  if (!op_spec.is_null()) j["operator"] = op_spec;
  if (!params.is_null()) j["params"] = params;
  j["seed"] = seed;
  j["out"] = out_dir;
  j["jobs"] = jobs;
  return j;
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> diags;
  if (std::find(kKinds.begin(), kKinds.end(), cfg.kind) == kKinds.end()) {
    std::string allowed;
    for (const auto& k : kKinds) allowed += (allowed.empty() ? "" : ", ") + k;
    diags.push_back("unknown experiment kind '" + cfg.kind + "' (allowed: " + allowed + ")");
  }
  if (!cfg.space_spec.is_object() || !cfg.space_spec.contains("type"))
    diags.push_back("space: descriptor with a 'type' field required");
  bool needs_op = cfg.kind == "norms" || cfg.kind == "approx" || cfg.kind == "onl" ||
                  cfg.kind == "qlocalise" || cfg.kind == "inverse";
  if (needs_op && !cfg.op_spec.is_object())
    diags.push_back("operator: descriptor required for experiment '" + cfg.kind + "'");
  if (cfg.jobs < 1) diags.push_back("jobs: must be >= 1");
  if (cfg.kind == "approx" && cfg.params.contains("eps_grid")) {
    auto g = cfg.params["eps_grid"].get<std::vector<double>>();
    for (size_t i = 1; i < g.size(); ++i)
      if (g[i] > g[i - 1]) {
        diags.push_back("params.eps_grid: must be sorted descending");
        break;
      }
  }
  if (cfg.op_spec.is_object() && cfg.op_spec.contains("p") && cfg.params.is_object() &&
      cfg.params.contains("partition_p")) {
    if (json_exponent(cfg.op_spec["p"]) != json_exponent(cfg.params["partition_p"]))
      diags.push_back("params.partition_p: exponent differs from the operator's p");
  }
  return diags;
}

LpOperator operator_from_spec(SpacePtr space, const nlohmann::json& spec, uint64_t seed) {
  std::string type = spec.at("type").get<std::string>();
  if (type == "file") {
    nlohmann::json j = read_json_file(spec.at("path").get<std::string>());
    return LpOperator::from_json(std::move(space), j);
  }
  if (type == "neumann") {
    LpOperator base = operator_from_spec(space, spec.at("base"), seed);
    return neumann_quasilocal(base, spec.at("lambda").get<double>(),
                              spec.value("tail_tol", 1e-10));
  }
  double p = json_exponent(spec.at("p"));
  int k = spec.value("k", 1);
  if (type == "identity") return LpOperator::identity(std::move(space), p, k);
  if (type == "shift") return shift_pattern(std::move(space), p, k);
  if (type == "diagonal") {
    LpOperator out(std::move(space), p, k);
    auto vals = spec.at("values").get<std::vector<double>>();
    Block blk(k * k, cpx(0));
    for (int x = 0; x < static_cast<int>(vals.size()); ++x) {
      for (int i = 0; i < k; ++i) blk[i * k + i] = cpx(vals[x]);
      out.set_block(x, x, Block(blk));
    }
    return out;
  }
  if (type == "random_band")
    return random_band(std::move(space), p, k, spec.value("r", 1.0), spec.value("density", 0.8),
                       spec.value("magnitude", 1.0), seed);
  throw std::invalid_argument("operator: unknown type '" + type + "'");
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mx;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mx);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

namespace {

struct RunContext {
  const ExperimentConfig& cfg;
  SpacePtr space;
  nlohmann::json manifest;
};

std::string b2s(bool b) { return b ? "true" : "false"; }

void finish(RunContext& ctx, const Csv& csv) {
  std::filesystem::create_directories(ctx.cfg.out_dir);
  csv.save(ctx.cfg.out_dir + "/report.csv");
}

void run_norms(RunContext& ctx) {
  LpOperator base = operator_from_spec(ctx.space, ctx.cfg.op_spec, ctx.cfg.seed);
  std::vector<double> p_grid;
  if (ctx.cfg.params.contains("p_grid"))
    for (const auto& pj : ctx.cfg.params["p_grid"]) p_grid.push_back(json_exponent(pj));
  else
    p_grid.push_back(base.p());
  std::vector<NormEstimate> cells(p_grid.size());
  parallel_for(static_cast<int>(p_grid.size()), ctx.cfg.jobs, [&](int i) {
    cells[i] = opnorm(base.with_exponent(p_grid[i]), {1e-10, ctx.cfg.seed});
  });
  Csv csv({"p", "lower", "upper", "method", "converged"});
  for (size_t i = 0; i < p_grid.size(); ++i)
    csv.row({exponent_token(p_grid[i]), format_double(cells[i].lower),
             format_double(cells[i].upper), cells[i].method, b2s(cells[i].converged)});
  ctx.manifest["cells"] = p_grid.size();
  finish(ctx, csv);
}

void run_approx(RunContext& ctx) {
  LpOperator b = operator_from_spec(ctx.space, ctx.cfg.op_spec, ctx.cfg.seed);
  auto eps_grid = ctx.cfg.params.at("eps_grid").get<std::vector<double>>();
  std::vector<ApproxMethod> methods;
  if (ctx.cfg.params.contains("methods"))
    for (const auto& mj : ctx.cfg.params["methods"]) methods.push_back(method_from_name(mj));
  else
    methods.push_back(ApproxMethod::truncate);
  ApproximationCurve curve = roe_curve(b, eps_grid, methods, {1e-10, ctx.cfg.seed});
  Csv csv({"eps", "R", "defect", "method", "achieved"});
  for (const auto& row : curve.rows)
    csv.row({format_double(row.eps), format_double(row.R), format_double(row.defect),
             method_name(row.method), b2s(row.achieved)});
  finish(ctx, csv);
}

void run_onl(RunContext& ctx) {
  LpOperator b = operator_from_spec(ctx.space, ctx.cfg.op_spec, ctx.cfg.seed);
  auto S_grid = ctx.cfg.params.at("S_grid").get<std::vector<double>>();
  std::vector<LocalisationResult> cells(S_grid.size());
  parallel_for(static_cast<int>(S_grid.size()), ctx.cfg.jobs,
               [&](int i) { cells[i] = onl_search(b, S_grid[i], {1e-10, ctx.cfg.seed}); });
  Csv csv({"S", "achieved", "reference_lower", "ratio", "support_diameter"});
  for (size_t i = 0; i < S_grid.size(); ++i)
    csv.row({format_double(S_grid[i]), format_double(cells[i].achieved),
             format_double(cells[i].reference),
             format_double(cells[i].reference > 0 ? cells[i].achieved / cells[i].reference : 1.0),
             format_double(cells[i].support_diameter)});
  finish(ctx, csv);
}

void run_qlocalise(RunContext& ctx) {
  LpOperator b = operator_from_spec(ctx.space, ctx.cfg.op_spec, ctx.cfg.seed);
  double eps = ctx.cfg.params.at("eps").get<double>();
  double L;
  if (ctx.cfg.params.contains("L") && ctx.cfg.params["L"].is_number()) {
    L = ctx.cfg.params["L"].get<double>();
  } else {
    // invert the band certificate: largest L with K mu L R <= eps
    double unit = commut_bound_band(b, 1.0).upper.value();
    L = unit > 0 ? eps / unit : 1.0;
  }
  LocalisationResult res = ql_localise(b, L, eps, {1e-10, ctx.cfg.seed});
  Csv csv({"L", "eps", "achieved", "reference_lower", "support_diameter", "sparsify_success",
           "certified"});
  csv.row({format_double(L), format_double(eps), format_double(res.achieved),
           format_double(res.reference), format_double(res.support_diameter),
           b2s(res.sparsify_success), b2s(res.certified)});
  finish(ctx, csv);
}

void run_sparsify(RunContext& ctx) {
  int m = ctx.cfg.params.at("m").get<int>();
  double c = ctx.cfg.params.at("c").get<double>();
  std::vector<double> w(ctx.space->size(), 1.0);
  if (ctx.cfg.params.contains("weights")) {
    const auto& wj = ctx.cfg.params["weights"];
    if (wj.is_array()) {
      w = wj.get<std::vector<double>>();
    } else if (wj == "random") {
      Rng rng(stream_seed(ctx.cfg.seed, "sparsify.weights"));
      for (auto& v : w) v = rng.next_double();
    } else if (wj == "atom") {
      std::fill(w.begin(), w.end(), 0.0);
      w[0] = 1.0;
    }  // "uniform" keeps the default
  }
  int dim = 0, side = 0;
  SparsifyStrategy strat = ctx.space->grid_shape(&dim, &side) ? SparsifyStrategy::grid_shift
                                                              : SparsifyStrategy::greedy;
  if (ctx.cfg.params.contains("strategy"))
    strat = ctx.cfg.params["strategy"] == "greedy" ? SparsifyStrategy::greedy
                                                   : SparsifyStrategy::grid_shift;
  SparsificationResult res = sparsify(*ctx.space, w, m, c, strat);
  Csv csv({"m", "c", "f", "fraction", "components", "diameter_bound", "success"});
  csv.row({std::to_string(m), format_double(c), std::to_string(res.f),
           format_double(res.fraction), std::to_string(res.components.size()),
           format_double(res.diameter_bound), b2s(res.success)});
  finish(ctx, csv);
}

void run_inverse(RunContext& ctx) {
  LpOperator a = operator_from_spec(ctx.space, ctx.cfg.op_spec, ctx.cfg.seed);
  double delta = ctx.cfg.params.at("delta").get<double>();
  auto eps_grid = ctx.cfg.params.at("eps_grid").get<std::vector<double>>();
  InverseReport rep = inverse_experiment(a, delta, eps_grid, {1e-10, ctx.cfg.seed});
  Csv csv({"R", "nu", "tag", "envelope"});
  for (size_t i = 0; i < rep.profile.size(); ++i)
    csv.row({format_double(rep.profile[i].R), format_double(rep.profile[i].value),
             tag_name(rep.profile[i].tag), format_double(rep.envelope[i])});
  Csv curve({"eps", "R", "defect", "method", "achieved"});
  for (const auto& row : rep.curve.rows)
    curve.row({format_double(row.eps), format_double(row.R), format_double(row.defect),
               method_name(row.method), b2s(row.achieved)});
  std::filesystem::create_directories(ctx.cfg.out_dir);
  curve.save(ctx.cfg.out_dir + "/curve.csv");
  ctx.manifest["residual"] = rep.residual;
  ctx.manifest["a_norm_upper"] = rep.a_norm_upper;
  ctx.manifest["delta"] = delta;
  if (rep.residual > 1e-10) throw std::logic_error("inverse experiment: residual exceeds 1e-10");
  finish(ctx, csv);
}

void run_property_a(RunContext& ctx) {
  auto r_grid = ctx.cfg.params.at("r_grid").get<std::vector<double>>();
  auto S_grid = ctx.cfg.params.at("S_grid").get<std::vector<int>>();
  double p = json_exponent(ctx.cfg.params.value("p", nlohmann::json(2.0)));
  auto rows = property_a_report(ctx.space, r_grid, S_grid, p, ctx.cfg.seed);
  Csv csv({"S", "r", "variation", "onl_ratio", "sparsify_fraction"});
  for (const auto& row : rows)
    csv.row({std::to_string(row.S), format_double(row.r), format_double(row.variation),
             format_double(row.onl_ratio), format_double(row.sparsify_fraction)});
  finish(ctx, csv);
}

}  // namespace

int run(const ExperimentConfig& cfg) {
  auto diags = validate(cfg);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << "config: " << d << "\n";
    return 2;
  }
  auto t0 = std::chrono::steady_clock::now();
  nlohmann::json manifest;
  try {
    RunContext ctx{cfg, std::make_shared<MetricSpace>(MetricSpace::build(cfg.space_spec)), {}};
    if (cfg.kind == "norms")
      run_norms(ctx);
    else if (cfg.kind == "approx")
      run_approx(ctx);
    else if (cfg.kind == "onl")
      run_onl(ctx);
    else if (cfg.kind == "qlocalise")
      run_qlocalise(ctx);
    else if (cfg.kind == "sparsify")
      run_sparsify(ctx);
    else if (cfg.kind == "inverse")
      run_inverse(ctx);
    else
      run_property_a(ctx);
    manifest = std::move(ctx.manifest);
  } catch (const std::invalid_argument& e) {
    std::cerr << "precondition: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "assertion: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  // wall time lives in the manifest only, so CSV bytes stay schedule-free
  manifest["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["config"] = cfg.to_json();
  write_text_file(cfg.out_dir + "/manifest.json", manifest.dump(2) + "\n");
  return 0;
}

}  // namespace coarseop
