#pragma once

#include <optional>
#include <vector>

#include "ope/aggregation.hpp"
#include "ope/mdp.hpp"
#include "ope/offline_data.hpp"
#include "ope/rng.hpp"

namespace ope {

// One member of a finite value-function class: tabular Q plus the per-layer
// offline-weighted average W(h) = sum_x mu_h(x, pi_e(x)) Q_h(x, pi_e(x)).
struct QFunction {
  std::vector<std::vector<double>> q;  // [h][i*A + a]
  std::vector<double> w;               // layers 0..H-2; may be empty
};

// A full offline policy evaluation problem instance.
struct OpeProblem {
  Mdp mdp;
  Policy pi_e;
  std::optional<Policy> pi_b;
  std::optional<OfflineDistribution> mu;
  std::optional<AggregationScheme> phi;
  std::vector<QFunction> fclass;
  double eps = 0.0;
  bool realizable = false;  // when set, Q^{pi_e} must lie in fclass (1e-9)
};

// W(h) for an arbitrary Q table under a deterministic policy.
std::vector<double> w_table(const Mtm& m, const OfflineDistribution& mu,
                            const Policy& pi_e,
                            const std::vector<std::vector<double>>& q);

// Three-states-per-layer chain with one deterministic action and one lazy
// stochastic action; the two-cell aggregation merges the states the
// evaluation policy distinguishes. Standard concentrability is polynomial in
// H while the aggregated coefficient grows exponentially.
struct ExampleInstance {
  Mtm mtm;
  AggregationScheme phi;
  Policy pi_e;
  Policy pi_b;
};

ExampleInstance example_instance(int H);

// Same chain with fixed deterministic rewards attached so it can be used as
// an evaluation target.
Mdp example_mdp(int H);

// Pair of MDPs over the aggregated state space: identical transitions,
// opposite small rewards on the witness cell subset at the witness layer.
struct AggregatedPair {
  Mdp m1, m2;  // states are the cells of phi
  Policy pi_e;
  double eps = 0.0;
  int h_star = -1;
  std::vector<int> cells;  // reward-carrying subset I
  double v1 = 0.0, v2 = 0.0;
};

AggregatedPair aggregated_pair(const Mtm& m, const AggregationScheme& phi,
                               const OfflineDistribution& mu,
                               const Policy& pi_e, double eps);

// Pair of MDPs on the original state space augmented with three extra states
// per layer (a +1 sink feeder, a -1 sink feeder, and a 0 sink). The two MDPs
// are indistinguishable through the aggregation yet their values differ by
// eps/H exactly.
struct LatentPairSpec {
  Mdp m1, m2;
  Policy pi_e;                 // extended with the sink action on new states
  OfflineDistribution mu_prime;
  AggregationScheme phi;       // base cells plus singletons for u, v, w
  std::vector<QFunction> fclass;  // exact (Q, W) of m1 and of m2
  double eps = 0.0;
  int h_star = -1;
  std::vector<int> cells;  // witness subset within layer h_star (base cells)
  double v1 = 0.0, v2 = 0.0;
};

LatentPairSpec latent_pair(const Mtm& m, const AggregationScheme& phi,
                           const OfflineDistribution& mu, const Policy& pi_e,
                           double eps);

// Rich-observation lift: each aggregation cell gets a pool of observations
// and a decoder psi with equal-size preimages inside the pool.
struct BlockLift {
  Mdp mdp;
  Policy pi_e;
  OfflineDistribution mu;
  AggregationScheme pools;  // lifted partition: one cell per base cell
  std::vector<int> psi;     // lifted global id -> base global id
};

// pool_size[h][c] must be a positive multiple of |phi.cells[h][c]|.
BlockLift block_lift(const Mdp& base, const AggregationScheme& phi,
                     const OfflineDistribution& mu, const Policy& pi_e,
                     const std::vector<std::vector<int>>& pool_size, Rng& rng);

// Convenience overload: every pool has multiplier * |cell| observations.
BlockLift block_lift(const Mdp& base, const AggregationScheme& phi,
                     const OfflineDistribution& mu, const Policy& pi_e,
                     int multiplier, Rng& rng);

// Compose a per-state table on the base model with the decoder.
std::vector<std::vector<double>> lift_table(
    const BlockLift& lift, const Mtm& base,
    const std::vector<std::vector<double>>& q);

// Lift a class member; the W table is copied (the lift preserves it).
QFunction lift_q(const BlockLift& lift, const Mtm& base, const QFunction& f);

// Two problems differing only in which half of a randomly drawn partition
// carries reward; any estimator agnostic to the partition cannot separate
// them cheaply.
struct AgnosticPair {
  OpeProblem p1;  // V^{pi_e} = 1
  OpeProblem p2;  // V^{pi_e} = 0
};

// 3-layer family: middle layer of 4N^2 states split uniformly into halves;
// action 0 enters the first half, action 1 the second; mu is the occupancy
// of the uniform behavior policy (admissible data).
AgnosticPair agnostic_admissible_instance(int N, Rng& rng);

// (H+1)-layer family with 2^H states per inner layer, half-preserving action
// 0 and a fully mixing action 1; rewards only at the last layer. mu is the
// explicit uniform distribution over (state, action), which keeps the
// pushforward coefficient at 4; trajectory data come from the uniform pi_b.
AgnosticPair agnostic_trajectory_instance(int H, Rng& rng);

}  // namespace ope
