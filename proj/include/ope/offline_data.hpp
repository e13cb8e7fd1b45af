#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ope/mdp.hpp"

namespace ope {

enum class Provenance { Explicit, Admissible };

// Per-layer distribution mu_h over (X_h x A) for h = 0..H-2.
struct OfflineDistribution {
  int horizon = 0;
  int num_actions = 0;
  std::vector<std::vector<double>> mu;  // mu[h][i*A + a]
  Provenance provenance = Provenance::Explicit;

  double state_mass(int h, int i) const {
    double s = 0.0;
    for (int a = 0; a < num_actions; ++a) s += mu[h][i * num_actions + a];
    return s;
  }
};

void validate(const Mtm& m, const OfflineDistribution& mu);

struct DataTuple {
  int x;  // global state id
  int a;
  double r;
  int xp;  // global id on the next layer
};

enum class DataKind { General, Admissible, Trajectory };

struct OfflineDataset {
  DataKind kind = DataKind::General;
  std::vector<std::vector<DataTuple>> tuples;  // per layer, for tuple kinds
  std::vector<Trajectory> trajectories;
  std::uint64_t seed = 0;
};

// n i.i.d. tuples per layer: (x,a) ~ mu_h, r ~ r(x,a), x' ~ T(.|x,a).
OfflineDataset sample_general(const Mdp& m, const OfflineDistribution& mu,
                              int n, Rng& rng);

// mu_h(x,a) = d_h^{pi_b}(x,a) by exact dynamic programming.
OfflineDistribution admissible_distribution(const Mtm& m, const Policy& pi_b);
inline OfflineDistribution admissible_distribution(const Mdp& m,
                                                   const Policy& pi_b) {
  return admissible_distribution(m.mtm, pi_b);
}

struct AdmissibleCheck {
  bool admissible = false;
  Policy witness;            // valid when admissible
  int refutation_layer = -1; // first mismatching layer otherwise
};

// Decision procedure: reconstruct a candidate behavior policy from mu,
// recompute its occupancy and compare layer by layer (tolerance 1e-9).
// States with zero mu mass get the lowest action id.
AdmissibleCheck check_admissible(const OfflineDistribution& mu, const Mtm& m);

OfflineDataset sample_trajectories(const Mdp& m, const Policy& pi_b, int n,
                                   Rng& rng);

// Flatten a trajectory dataset to per-layer (x,a,r,x') tuples (layers with a
// successor only), preserving trajectory order.
std::vector<std::vector<DataTuple>> flatten(const OfflineDataset& data,
                                            const Mtm& m);

}  // namespace ope
