#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "ope/mdp.hpp"
#include "ope/offline_data.hpp"

namespace ope {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-layer partition of the state space into cells.
struct AggregationScheme {
  // cells[h][c] lists global state ids; cells must tile each layer.
  std::vector<std::vector<std::vector<int>>> cells;
  std::vector<int> cell_of;  // global id -> cell index within its layer

  int num_cells(int h) const { return static_cast<int>(cells[h].size()); }
  // Builds cell_of and checks the partition conditions.
  void finalize(const Mtm& m);
};

// Aggregated chain under a fixed policy: cell transitions weighted by
// pi(a|x) mu_h(x,a), aggregated initial distribution and occupancy, and the
// offline cell mass nu_h(phi) = sum_{x in phi} mu_h(x, pi_e(x)) when the
// policy is deterministic.
struct AggregatedModel {
  int horizon = 0;
  std::vector<std::vector<std::vector<double>>> tbar;  // [h][c] -> next cells
  std::vector<double> rhobar;
  std::vector<std::vector<double>> dbar;   // layers 0..H-1
  std::vector<std::vector<double>> nubar;  // layers 0..H-2; empty if pi random
  // Cells whose aggregate weight under mu vanishes get a uniform row and are
  // flagged here; they carry no aggregated occupancy in the paper instances.
  bool partially_defined = false;
  std::vector<std::pair<int, int>> zero_weight_cells;  // (layer, cell)
};

// appendix_d_base replaces the layer-1 base case of the aggregated occupancy
// by (1/H) sum_x rho(x) (normalization variant used by the estimator
// analysis; off by default).
AggregatedModel aggregate(const Mtm& m, const OfflineDistribution& mu,
                          const AggregationScheme& phi, const Policy& pi,
                          bool appendix_d_base = false);

// Per-action aggregated transitions T(phi'|phi,a) with mu_h(x,a) weights,
// plus the in-cell weights mu(x | phi, a) used by the pair constructions.
struct AggregatedActionModel {
  int horizon = 0;
  // tbar[h][(c*A + a)] -> vector over next-layer cells.
  std::vector<std::vector<std::vector<double>>> tbar;
  // weight[h][i*A + a] = mu(x | cell(x), a); uniform in zero-mass cells.
  std::vector<std::vector<double>> weight;
  bool partially_defined = false;
  std::vector<std::pair<int, int>> zero_weight_cells;  // (layer, cell*A+a)
};

AggregatedActionModel aggregate_actions(const Mtm& m,
                                        const OfflineDistribution& mu,
                                        const AggregationScheme& phi);

// max over layers and (x,a) of d_h^{pi_e}(x,a) / mu_h(x,a); 0/0 = 0 and
// positive/0 = infinity.
double standard_concentrability(const Mtm& m, const OfflineDistribution& mu,
                                const Policy& pi_e);

// Same ratio maximized over all policies: the numerator becomes the largest
// occupancy any policy can place on (x,a), computed by a reach-probability
// dynamic program per target state.
double all_policy_concentrability(const Mtm& m, const OfflineDistribution& mu);

struct AggregatedConcentrability {
  bool feasible = false;
  double value = 0.0;
  int h_star = -1;                // layer of the witness
  std::vector<int> witness;       // cell indices within that layer
  bool exact = true;              // false when the prefix heuristic was used
};

// Definition-3.1 style maximization over cell subsets I with
// sum_{phi in I} dbar(phi) >= eps, over layers 0..H-2. Exhaustive when a
// layer has at most max_exact_cells cells; otherwise the best feasible
// prefix in decreasing dbar/nubar order (a certified lower bound).
AggregatedConcentrability aggregated_concentrability(
    const AggregatedModel& agg, double eps, int max_exact_cells = 20);

struct PushforwardConcentrability {
  double c_pf = 1.0;
  double c_x = 1.0;
  double c_a = 1.0;
};

// C_A bounds 1/mu(a|x); C_X bounds next-state ratios T(x'|x,a)/mu(x') and
// rho(x)/mu(x); only layers that carry a mu participate.
PushforwardConcentrability pushforward_concentrability(
    const Mtm& m, const OfflineDistribution& mu);

// W(h) = sum_x mu_h(x, pi_e(x)) Q_h^{pi_e}(x, pi_e(x)) for h = 0..H-2.
std::vector<double> w_function(const Mdp& m, const OfflineDistribution& mu,
                               const Policy& pi_e);

}  // namespace ope
