#pragma once

#include <string>
#include <vector>

#include "ope/rng.hpp"

namespace ope {

// Thrown when an input violates a structural invariant (non-stochastic row,
// reward outside [-1,1], ...). The CLI maps this to exit code 3.
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a requested quantity has no feasible answer (e.g. the
// aggregated concentrability subset constraint cannot be met). Exit code 4.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kStochasticTol = 1e-12;  // row sums at construction
inline constexpr double kOccupancyTol = 1e-10;   // derived per-layer masses
inline constexpr double kIdentityTol = 1e-9;     // derived value identities

// Finite-support reward distribution on [-1, 1].
struct RewardDist {
  std::vector<double> support;
  std::vector<double> prob;

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) m += support[i] * prob[i];
    return m;
  }

  static RewardDist constant(double v) { return RewardDist{{v}, {1.0}}; }

  // {-1,+1}-valued distribution with the given mean (block-MDP lifts).
  static RewardDist pm_one(double mean) {
    return RewardDist{{1.0, -1.0}, {(1.0 + mean) / 2.0, (1.0 - mean) / 2.0}};
  }
};

// Layered Markov transition model: states live on layers 0..H-1, transitions
// exist for layers 0..H-2 and are supported on the next layer only. States
// have contiguous global ids, layer by layer.
struct Mtm {
  int horizon = 0;      // H
  int num_actions = 0;  // A
  std::vector<int> layer_size;
  std::vector<int> layer_offset;  // global id of the first state of layer h
  // transition[h] has layer_size[h]*A rows of length layer_size[h+1],
  // stored row-major: row (i*A + a).
  std::vector<std::vector<double>> transition;
  std::vector<double> initial;  // over layer 0

  int num_states() const { return layer_offset.back() + layer_size.back(); }
  int gid(int h, int i) const { return layer_offset[h] + i; }
  int layer_of(int g) const {
    int h = 0;
    while (h + 1 < horizon && g >= layer_offset[h + 1]) ++h;
    return h;
  }
  int index_of(int g) const { return g - layer_offset[layer_of(g)]; }
  const double* row(int h, int i, int a) const {
    return transition[h].data() +
           static_cast<std::size_t>(i * num_actions + a) * layer_size[h + 1];
  }
  double* row(int h, int i, int a) {
    return transition[h].data() +
           static_cast<std::size_t>(i * num_actions + a) * layer_size[h + 1];
  }

  void init_layout(int H, int A, const std::vector<int>& sizes);
};

// MTM plus a reward model; rewards are collected at every layer including the
// terminal one (which has zero continuation).
struct Mdp {
  Mtm mtm;
  // reward[h] has layer_size[h]*A entries, indexed i*A + a.
  std::vector<std::vector<RewardDist>> reward;

  double mean_reward(int h, int i, int a) const {
    return reward[h][i * mtm.num_actions + a].mean();
  }
};

// Per-state action distribution, indexed by global state id.
struct Policy {
  int num_actions = 0;
  std::vector<std::vector<double>> dist;

  bool deterministic() const;
  // Action of a deterministic policy (largest-mass action otherwise).
  int action(int g) const;
  double prob(int g, int a) const { return dist[g][a]; }

  static Policy uniform(const Mtm& m);
  static Policy fixed_action(const Mtm& m, int a);
  // pi(a|x) = weights[a] everywhere.
  static Policy mixture(const Mtm& m, const std::vector<double>& weights);
};

struct Occupancy {
  // state[h][i] = d_h(x); state_action[h][i*A+a] = d_h(x, a).
  std::vector<std::vector<double>> state;
  std::vector<std::vector<double>> state_action;
};

struct ValueTable {
  // q[h][i*A+a], v[h][i], and the scalar value at the initial distribution.
  std::vector<std::vector<double>> q;
  std::vector<std::vector<double>> v;
  double v_rho = 0.0;
};

struct Trajectory {
  std::vector<int> states;  // H global ids
  std::vector<int> actions;
  std::vector<double> rewards;
};

void validate(const Mtm& m);
void validate(const Mdp& m);
void validate_policy(const Mtm& m, const Policy& pi);

Occupancy occupancy(const Mtm& m, const Policy& pi);
inline Occupancy occupancy(const Mdp& m, const Policy& pi) {
  return occupancy(m.mtm, pi);
}

ValueTable value(const Mdp& m, const Policy& pi);

Trajectory sample_trajectory(const Mdp& m, const Policy& pi, Rng& rng);

// Trajectory importance sampling: mean of (prod_h pi_e/pi_b) * (sum_h r_h).
// Throws InvariantError when pi_b puts zero mass on a logged action.
double is_estimate(const std::vector<Trajectory>& trajectories,
                   const Policy& pi_e, const Policy& pi_b);

}  // namespace ope
