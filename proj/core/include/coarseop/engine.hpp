#pragma once

#include <functional>

#include "coarseop/io.hpp"
#include "coarseop/locality.hpp"

namespace coarseop {

/// One experiment = kind + space + operator + parameter grids + master seed.
/// Round-trips losslessly through JSON; every run embeds the resolved config
/// in its manifest.
struct ExperimentConfig {
  std::string kind;  // norms | approx | onl | qlocalise | sparsify | inverse | property-a-sweep
  nlohmann::json space_spec;
  nlohmann::json op_spec;  // optional for sparsify / property-a-sweep
  nlohmann::json params;
  uint64_t seed = 0;
  std::string out_dir = "out";
  int jobs = 1;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Schema and cross-field diagnostics, no execution. Empty = valid.
std::vector<std::string> validate(const ExperimentConfig& cfg);

/// Execute and write report CSV(s) + manifest.json into cfg.out_dir.
/// Exit code 0: all embedded assertions passed; 1: an assertion failed;
/// 2: invalid config or violated precondition.
int run(const ExperimentConfig& cfg);

/// Operator from a descriptor: random_band | shift | identity | neumann |
/// file. All randomness is drawn from named streams off `seed`.
LpOperator operator_from_spec(SpacePtr space, const nlohmann::json& spec, uint64_t seed);

/// Run fn(0..n-1) on `jobs` workers; results must be written to indexed
/// storage so output order is independent of scheduling.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace coarseop
