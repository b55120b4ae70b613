// coarse-op: experiment harness for quasi-locality measurements on finite
// metric spaces. Subcommands mirror the library modules; all experiments run
// through a JSON config plus --seed/--out/--jobs overrides.
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "coarseop/engine.hpp"

using namespace coarseop;

namespace {

std::string default_out() {
  const char* env = std::getenv("COARSE_OP_OUT");
  return env ? env : "out";
}

struct CommonOpts {
  std::string config;
  std::string out = default_out();
  uint64_t seed = 0;
  bool seed_set = false;
  bool out_set = false;
  int jobs = 1;
  bool jobs_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required = true) {
  auto* c = cmd->add_option("--config", o.config, "experiment config (JSON)");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "master seed override")->each([&](const std::string&) {
    o.seed_set = true;
  });
  cmd->add_option("--out", o.out, "output directory override")->each([&](const std::string&) {
    o.out_set = true;
  });
  cmd->add_option("--jobs", o.jobs, "worker count")->each([&](const std::string&) {
    o.jobs_set = true;
  });
}

ExperimentConfig load_config(const CommonOpts& o, const std::string& forced_kind = "") {
  nlohmann::json j = read_json_file(o.config);
  if (!forced_kind.empty()) j["experiment"] = forced_kind;
  ExperimentConfig cfg = ExperimentConfig::from_json(j);
  if (o.seed_set) cfg.seed = o.seed;
  if (o.out_set || !j.contains("out")) cfg.out_dir = o.out;
  if (o.jobs_set) cfg.jobs = o.jobs;
  return cfg;
}

int run_experiment(const CommonOpts& o, const std::string& forced_kind) {
  try {
    return run(load_config(o, forced_kind));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-locality experiments on finite metric spaces"};
  app.require_subcommand(1);

  // space: build a metric space and write space.json
  auto* sp = app.add_subcommand("space", "build a metric space file");
  std::string sp_spec;
  std::string sp_out = default_out();
  sp->add_option("--spec", sp_spec, "generator descriptor (inline JSON)")->required();
  sp->add_option("--out", sp_out, "output directory");

  // op: build an operator over a space file and write op.json
  auto* op = app.add_subcommand("op", "build an operator file");
  std::string op_space, op_spec;
  std::string op_out = default_out();
  uint64_t op_seed = 0;
  op->add_option("--space", op_space, "space file (JSON)")->required();
  op->add_option("--spec", op_spec, "operator descriptor (inline JSON)")->required();
  op->add_option("--seed", op_seed, "master seed");
  op->add_option("--out", op_out, "output directory");

  // pou: build a partition of unity and a variation report
  auto* pu = app.add_subcommand("pou", "build a partition of unity");
  std::string pu_space, pu_method = "disjoint", pu_p = "1";
  std::string pu_out = default_out();
  double pu_r = 2;
  int pu_S = 5;
  pu->add_option("--space", pu_space, "space file (JSON)")->required();
  pu->add_option("--method", pu_method, "disjoint | bump | folner");
  pu->add_option("--r", pu_r, "cover radius (disjoint/bump)");
  pu->add_option("--S", pu_S, "box side (folner)");
  pu->add_option("--p", pu_p, "partition exponent");
  pu->add_option("--out", pu_out, "output directory");

  CommonOpts approx_o, onl_o, ql_o, sparsify_o, inverse_o, sweep_o, run_o, validate_o;
  add_common(app.add_subcommand("approx", "approximation curve experiment"), approx_o);
  add_common(app.add_subcommand("onl", "norm localisation window sweep"), onl_o);
  add_common(app.add_subcommand("qlocalise", "witness localisation experiment"), ql_o);
  add_common(app.add_subcommand("sparsify", "mass sparsification experiment"), sparsify_o);
  add_common(app.add_subcommand("inverse", "inverse quasi-locality experiment"), inverse_o);
  add_common(app.add_subcommand("sweep", "descriptive parameter sweep"), sweep_o);
  add_common(app.add_subcommand("run", "run a config as-is"), run_o);
  add_common(app.add_subcommand("validate", "check a config without running"), validate_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sp->parsed()) {
      MetricSpace s = MetricSpace::build(nlohmann::json::parse(sp_spec));
      std::filesystem::create_directories(sp_out);
      write_text_file(sp_out + "/space.json", s.to_json().dump(2) + "\n");
      std::cout << "n=" << s.size() << " diameter=" << s.diameter() << "\n";
      return 0;
    }
    if (op->parsed()) {
      auto space = std::make_shared<MetricSpace>(
          MetricSpace::build(read_json_file(op_space)));
      LpOperator b = operator_from_spec(space, nlohmann::json::parse(op_spec), op_seed);
      std::filesystem::create_directories(op_out);
      write_text_file(op_out + "/op.json", b.to_json().dump() + "\n");
      std::cout << "blocks=" << b.blocks().size() << " propagation=" << b.propagation() << "\n";
      return 0;
    }
    if (pu->parsed()) {
      auto space = std::make_shared<MetricSpace>(
          MetricSpace::build(read_json_file(pu_space)));
      double p = parse_exponent(pu_p);
      PartitionOfUnity pou;
      if (pu_method == "folner") {
        pou = grid_folner_pou(*space, pu_S, p);
      } else {
        Cover cov = disjoint_cover(*space, pu_r);
        pou = pou_from_cover(*space, cov, p);
      }
      std::filesystem::create_directories(pu_out);
      write_text_file(pu_out + "/partition.json", pou_to_json(pou).dump() + "\n");
      Csv csv({"r", "variation"});
      for (double r = 0; r <= std::min(10.0, space->diameter()); r += 1)
        csv.row({format_double(r), format_double(variation(*space, pou, r))});
      csv.save(pu_out + "/variation.csv");
      std::cout << "functions=" << pou.phi.size() << "\n";
      return 0;
    }
    if (app.get_subcommand("validate")->parsed()) {
      ExperimentConfig cfg = load_config(validate_o);
      auto diags = validate(cfg);
      for (const auto& d : diags) std::cout << d << "\n";
      std::cout << (diags.empty() ? "ok" : std::to_string(diags.size()) + " issue(s)") << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  if (app.get_subcommand("approx")->parsed()) return run_experiment(approx_o, "approx");
  if (app.get_subcommand("onl")->parsed()) return run_experiment(onl_o, "onl");
  if (app.get_subcommand("qlocalise")->parsed()) return run_experiment(ql_o, "qlocalise");
  if (app.get_subcommand("sparsify")->parsed()) return run_experiment(sparsify_o, "sparsify");
  if (app.get_subcommand("inverse")->parsed()) return run_experiment(inverse_o, "inverse");
  if (app.get_subcommand("sweep")->parsed()) return run_experiment(sweep_o, "property-a-sweep");
  if (app.get_subcommand("run")->parsed()) return run_experiment(run_o, "");
  return 2;
}
