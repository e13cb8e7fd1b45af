#pragma once

#include <functional>
#include <vector>

#include "ope/hard_instances.hpp"
#include "ope/mdp.hpp"
#include "ope/offline_data.hpp"
#include "ope/rng.hpp"

namespace ope {

// Lowest-id action different from pi_e(x) at every state; rejects
// single-action models.
Policy deviation_policy(const Mtm& m, const Policy& pi_e);

// Replication lift: each of the first H-1 layers is stretched into K
// sub-layers. Inside a block the evaluation action self-loops and any other
// action resamples the state from the behavior occupancy; the final
// sub-layer of a block steps through the original transition. Rewards live
// on block boundaries (and on the terminal layer, which is copied verbatim).
struct ReplicatedProblem {
  Mdp mdp;        // horizon (H-1)K + 1
  Policy pi_e;
  Policy pi_b;    // original pi_b on boundaries, half/half mix inside blocks
  Policy pi_o;
  int K = 1;
  int base_horizon = 0;
  std::vector<QFunction> fclass;  // lifted class members
};

ReplicatedProblem replicate(const Mdp& base, const Policy& pi_e,
                            const Policy& pi_b, int K,
                            const std::vector<QFunction>& fclass = {});

// Closed-form lift of a Q table: boundary sub-layers keep Q(x,a);
// intermediate sub-layers keep Q(x, pi_e(x)) on the evaluation action and
// the behavior-occupancy average of Q(., pi_e(.)) on any other action.
std::vector<std::vector<double>> replicate_table(
    const Mdp& base, const Policy& pi_e, const Policy& pi_b, int K,
    const std::vector<std::vector<double>>& q);

// Assemble one replicated trajectory from per-layer blocks of admissible
// tuples (blocks[h] holds exactly K tuples of base layer h). Coin flips pick
// between the evaluation action (stay, zero reward) and the deviation action
// (jump to the next tuple's state, zero reward); the block boundary consumes
// the current tuple's (a, r, x'). The returned trajectory carries H~ states
// but only H~-1 actions/rewards: the terminal step has no source tuple and
// is completed by the reduction driver.
Trajectory convert(const ReplicatedProblem& rp,
                   const std::vector<std::vector<DataTuple>>& blocks,
                   Rng& rng);

// Bad event: some block has every intermediate action equal to the
// evaluation action (vacuously true when K = 1).
bool in_e0(const Trajectory& tr, const Policy& pi_e, int K,
           int base_horizon);

using TrajectoryEstimator = std::function<double(
    const std::vector<Trajectory>&, const std::vector<QFunction>&)>;

// Full reduction: split per-layer admissible tuples (K*n per layer) into n
// blocks, convert each block set to a trajectory, complete the terminal
// action/reward from the replicated model, and hand the trajectories to the
// estimator together with the lifted function class.
double reduce_and_evaluate(const ReplicatedProblem& rp,
                           const std::vector<std::vector<DataTuple>>& tuples,
                           const TrajectoryEstimator& estimator, Rng& rng);

}  // namespace ope
