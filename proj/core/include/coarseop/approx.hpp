#pragma once

#include "coarseop/pou.hpp"

namespace coarseop {

/// Partial injection x -> t(x) with displacement bound r.
struct PartialTranslation {
  std::vector<std::pair<int, int>> pairs;  // (x, t(x)), sorted by x
  double displacement = 0;                 // max d(x, t(x))
};

/// b = Sum_k f_k V_k with f_k block-diagonal multipliers and V_k unit-entry
/// partial translations; K parts, K <= max row/column degree.
struct BandDecomposition {
  struct Part {
    std::vector<std::pair<int, Block>> multiplier;  // x -> f_k(x), k x k block
    PartialTranslation translation;
  };
  std::vector<Part> parts;
  int fiber_dim = 1;
};

enum class ApproxMethod { truncate, pou_end, pou_mid };

struct ApproximationCurve {
  struct Row {
    double eps = 0;
    double R = 0;       // propagation of the chosen approximant
    double defect = 0;  // certified upper bound on |b - approximant|
    ApproxMethod method = ApproxMethod::truncate;
    bool achieved = false;  // defect <= eps reached within the ladder
  };
  std::vector<Row> rows;
};

/// Sum_j e_j b e_j for positive contractions e_j with pairwise disjoint
/// supports. Norm equals sup_j |e_j b e_j|; propagation <= max support diam.
LpOperator block_cutdown(const LpOperator& b, const std::vector<ScalarFunction>& family);

/// Decompose a band operator by proper edge coloring of its bipartite support
/// graph; exactly max-degree parts, exact reconstruction.
BandDecomposition band_decompose(const LpOperator& b);

LpOperator rebuild(const BandDecomposition& dec, SpacePtr space, double p);

/// Sum_i phi_i b psi_i (p = inf) resp. Sum_i psi_i b phi_i (p = 1),
/// assembled as a Schur multiplier. Requires a 1-partition.
LpOperator approximant_end(const LpOperator& b, const PartitionOfUnity& pou,
                           const DualFamily& dual);

struct DefectCertificate {
  double defect = 0;  // measured |b - b_eps|
  double bound = 0;   // max_i |[psi_i, b]|
};

DefectCertificate defect_certificate_end(const LpOperator& b, const PartitionOfUnity& pou,
                                         const DualFamily& dual);

/// b' = Sum_i phi_i^{p/q} b phi_i for a p-partition, p in (1, inf).
LpOperator approximant_mid(const LpOperator& b, const PartitionOfUnity& pou);

struct HaloCheck {
  double lhs = 0;  // |e b e - Sum e_i b e_i|
  double rhs = 0;  // band certificate K mu L R
  bool certified = false;
};

/// Family of positive contractions with supports pairwise at distance > 2/L;
/// asserts lhs <= rhs when b is banded (always, at finite scale).
HaloCheck halo_estimate_check(const LpOperator& b, const std::vector<ScalarFunction>& family,
                              double L);

ApproximationCurve roe_curve(const LpOperator& b, const std::vector<double>& eps_grid,
                             const std::vector<ApproxMethod>& methods,
                             const OpnormOptions& opt = {});

/// Parameter schedule for the mid approximant: L inverted from the band
/// commutator certificate, bounded-geometry count K at radius s + 1/L,
/// variation target eps/(4MK), box side grown until the target is met.
struct MidPipelineReport {
  double eps = 0;
  double M = 0;           // certified |b|
  double L = 0;
  int K = 0;
  double variation_target = 0;
  double variation_radius = 0;
  int S = 0;              // chosen box side
  double variation_measured = 0;
  double defect = 0;      // certified |b - b'|
  double approx_norm = 0; // certified |b'|
};

MidPipelineReport mid_pipeline(const LpOperator& b, double eps, const OpnormOptions& opt = {});

}  // namespace coarseop
