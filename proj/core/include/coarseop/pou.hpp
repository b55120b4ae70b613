#pragma once

#include "coarseop/lp_op.hpp"
#include "coarseop/space.hpp"

namespace coarseop {

struct Cover {
  std::vector<Subset> members;
  double diameter_bound = 0;  // max diam(U_i), recorded
  int multiplicity = 0;       // max number of members containing a point
};

/// Metric p-partition of unity: Sum_i phi_i(x)^p = 1 for p in (1, inf),
/// Sum_i phi_i(x) = 1 for p in {1, inf} (the 1-partition convention).
struct PartitionOfUnity {
  double p = 1;
  std::vector<ScalarFunction> phi;
  double support_diameter = 0;
  int multiplicity = 0;
};

/// psi_i == 1 on supp(phi_i), supported in the Rh-halo, L-Lipschitz.
struct DualFamily {
  std::vector<ScalarFunction> psi;
  double L = 0;
  double halo_radius = 0;
};

struct Coloring {
  int colors = 0;
  std::vector<int> assignment;  // index -> color in [0, colors)
};

/// Voronoi cells of greedy_net(space, r), ties to the lowest net index.
/// Disjoint, diameter <= 2r, multiplicity 1.
Cover disjoint_cover(const MetricSpace& s, double r);

/// Bump normalization g_i(x) = max(0, 1 - d(x, U_i)); phi_i = g_i normalized
/// per the exponent convention. Disjoint covers yield characteristic functions.
PartitionOfUnity pou_from_cover(const MetricSpace& s, const Cover& cover, double p);

/// Folner-box partition on a grid: translates of the S-box fully inside the
/// window, per-point renormalization where fewer translates reach.
PartitionOfUnity grid_folner_pou(const MetricSpace& s, int S, double p);

/// Points covered by the full count of S-box translates (the bulk); the
/// complement is the boundary layer where renormalization kicks in.
Subset grid_bulk(const MetricSpace& s, int S);

/// max over pairs d(x,y) <= r of (Sum_i |phi_i(x) - phi_i(y)|^p)^{1/p};
/// the p=1 formula for p in {1, inf}.
double variation(const MetricSpace& s, const PartitionOfUnity& pou, double r);

/// Same, restricted to pairs with both endpoints in `pts`.
double variation_on(const MetricSpace& s, const PartitionOfUnity& pou, double r,
                    const Subset& pts);

/// True iff variation(s, pou, r) <= tau; bails out on the first violating
/// pair, so failing sweeps are cheap.
bool variation_below(const MetricSpace& s, const PartitionOfUnity& pou, double r, double tau);

/// psi_i(x) = clamp_{[0,1]}(1 - L * max(0, d(x, supp phi_i) - plateau));
/// halo radius plateau + 1/L. plateau = 0 is the plain dual family.
DualFamily dual_family(const MetricSpace& s, const PartitionOfUnity& pou, double L,
                       double plateau = 0);

/// Greedy coloring of the intersection graph in descending-degree order;
/// uses at most max-degree + 1 colors, color classes pairwise disjoint.
Coloring color_family(const std::vector<Subset>& family);

/// Throw std::logic_error if any structural invariant fails.
void verify_cover(const MetricSpace& s, const Cover& c);
void verify_partition(const MetricSpace& s, const PartitionOfUnity& pou);
void verify_dual(const MetricSpace& s, const PartitionOfUnity& pou, const DualFamily& dual);
void verify_coloring(const std::vector<Subset>& family, const Coloring& col);

nlohmann::json pou_to_json(const PartitionOfUnity& pou);
PartitionOfUnity pou_from_json(const MetricSpace& s, const nlohmann::json& j);

}  // namespace coarseop
