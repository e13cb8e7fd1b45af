#pragma once

#include <cstddef>
#include <vector>

#include "ope/aggregation.hpp"
#include "ope/mdp.hpp"
#include "ope/offline_data.hpp"
#include "ope/rng.hpp"

namespace ope {

// V-form tabular function: values[h][i] over states.
using VFunction = std::vector<std::vector<double>>;

struct ValueFunctionClass {
  std::vector<VFunction> members;
};

// Reduce a Q table to V-form: f(x) = sum_a pi_e(a|x) q(x,a).
VFunction to_v_form(const Mtm& m, const Policy& pi_e,
                    const std::vector<std::vector<double>>& q);

// Data kept after filtering to the evaluation action. The action is
// implicit; n counts the original per-layer samples, n_kept the survivors.
struct FilteredDataset {
  struct Sample {
    int x;  // global id
    double r;
    int xp;  // global id, next layer
  };
  std::vector<std::vector<Sample>> samples;  // layers 0..H-2
  std::vector<std::size_t> n;
  std::vector<std::size_t> n_kept;
};

// Deterministic pi_e keeps tuples with a = pi_e(x); a stochastic pi_e keeps
// a tuple when an independently drawn a' ~ pi_e(.|x) matches its action.
FilteredDataset preprocess(const OfflineDataset& data, const Mtm& m,
                           const Policy& pi_e, Rng& rng);

// nu_hat[h][i] = (#kept samples at state i) / n_h; zero on the final layer.
std::vector<std::vector<double>> empirical_weights(const FilteredDataset& d,
                                                   const Mtm& m);

// Coarsest scheme whose cells are constant in both functions: two states of
// a layer share a cell iff f and g take exactly equal values on them. Cells
// are ordered by first occurrence.
AggregationScheme induced_partition(const Mtm& m, const VFunction& f,
                                    const VFunction& g);

// (T f)(x) = r(x, pi_e(x)) + sum_x' T(x'|x, pi_e(x)) f(x'); the final layer
// has no successor term.
VFunction bellman_image(const Mdp& m, const Policy& pi_e, const VFunction& f);

// nu-weighted cell averages of T f; cells with zero nu mass map to 0.
VFunction exact_projection(const Mdp& m, const Policy& pi_e,
                           const std::vector<std::vector<double>>& nu,
                           const VFunction& f, const AggregationScheme& phi);

// Per-cell sample mean of r_i + f(x'_i); empty cells map to 0, and so does
// the final layer (it has no samples).
VFunction empirical_projection(const FilteredDataset& d, const Mtm& m,
                               const VFunction& f,
                               const AggregationScheme& phi);

// sqrt(sum_i nu[i] g[i]^2)
double weighted_norm(const std::vector<double>& nu,
                     const std::vector<double>& g);

struct BvftReport {
  int selected = 0;
  std::vector<std::vector<double>> loss;  // [i][j]: max-over-layers loss
  double estimate = 0.0;                  // E_{x ~ rho}[f_hat(x)]
  std::size_t phi_max = 0;  // largest induced-partition layer size seen
  double eps_stat = 0.0;    // heuristic statistical-error diagnostic
};

// Tournament selection: loss[i][j] = max_h || f_i - proj_{G(f_i,f_j)} f_i ||
// under the empirical weights; pick argmin_i max_j (ties: lowest index) and
// report its value at the initial distribution. The pair loop runs under
// OpenMP unless parallel = false (kept as a bitwise-identical reference).
BvftReport bvft_select(const Mtm& m, const OfflineDataset& data,
                       const ValueFunctionClass& fclass, const Policy& pi_e,
                       Rng& rng, bool parallel = true);

// Round every value to the nearest multiple of eps / (H * sqrt(cbar)).
ValueFunctionClass discretize_class(const ValueFunctionClass& fclass,
                                    double eps, double cbar, int horizon);

}  // namespace ope
