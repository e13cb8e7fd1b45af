#include "ope/offline_data.hpp"

#include <cmath>

namespace ope {

void validate(const Mtm& m, const OfflineDistribution& mu) {
  if (mu.horizon != m.horizon || mu.num_actions != m.num_actions ||
      static_cast<int>(mu.mu.size()) != m.horizon - 1)
    throw InvariantError("offline distribution must cover layers 1..H-1");
  for (int h = 0; h + 1 < m.horizon; ++h) {
    if (static_cast<int>(mu.mu[h].size()) !=
        m.layer_size[h] * m.num_actions)
      throw InvariantError("offline distribution layer size mismatch");
    double sum = 0.0;
    for (double p : mu.mu[h]) {
      if (p < -kStochasticTol)
        throw InvariantError("negative offline mass");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kStochasticTol)
      throw InvariantError("offline distribution layer does not sum to 1");
  }
}

OfflineDataset sample_general(const Mdp& m, const OfflineDistribution& mu,
                              int n, Rng& rng) {
  validate(m.mtm, mu);
  const Mtm& t = m.mtm;
  OfflineDataset data;
  data.kind = DataKind::General;
  data.tuples.assign(t.horizon - 1, {});
  for (int h = 0; h + 1 < t.horizon; ++h) {
    data.tuples[h].reserve(n);
    for (int k = 0; k < n; ++k) {
      int xa = rng.categorical(mu.mu[h]);
      int i = xa / t.num_actions;
      int a = xa % t.num_actions;
      const RewardDist& rd = m.reward[h][i * t.num_actions + a];
      double r =
          rd.support[rd.prob.size() == 1 ? 0 : rng.categorical(rd.prob)];
      int j = rng.categorical(t.row(h, i, a), t.layer_size[h + 1]);
      data.tuples[h].push_back({t.gid(h, i), a, r, t.gid(h + 1, j)});
    }
  }
  return data;
}

OfflineDistribution admissible_distribution(const Mtm& m, const Policy& pi_b) {
  Occupancy occ = occupancy(m, pi_b);
  OfflineDistribution mu;
  mu.horizon = m.horizon;
  mu.num_actions = m.num_actions;
  mu.provenance = Provenance::Admissible;
  mu.mu.assign(m.horizon - 1, {});
  for (int h = 0; h + 1 < m.horizon; ++h) mu.mu[h] = occ.state_action[h];
  return mu;
}

AdmissibleCheck check_admissible(const OfflineDistribution& mu, const Mtm& m) {
  validate(m, mu);
  AdmissibleCheck result;
  Policy pi;
  pi.num_actions = m.num_actions;
  pi.dist.assign(m.num_states(), std::vector<double>(m.num_actions, 0.0));
  for (int h = 0; h < m.horizon; ++h) {
    for (int i = 0; i < m.layer_size[h]; ++i) {
      int g = m.gid(h, i);
      double mass = (h + 1 < m.horizon) ? mu.state_mass(h, i) : 0.0;
      if (mass > 0.0) {
        for (int a = 0; a < m.num_actions; ++a)
          pi.dist[g][a] = mu.mu[h][i * m.num_actions + a] / mass;
      } else {
        pi.dist[g][0] = 1.0;  // unconstrained on unvisited states
      }
    }
  }
  Occupancy occ = occupancy(m, pi);
  for (int h = 0; h + 1 < m.horizon; ++h)
    for (std::size_t k = 0; k < mu.mu[h].size(); ++k)
      if (std::abs(mu.mu[h][k] - occ.state_action[h][k]) > kIdentityTol) {
        result.refutation_layer = h;
        return result;
      }
  result.admissible = true;
  result.witness = pi;
  return result;
}

OfflineDataset sample_trajectories(const Mdp& m, const Policy& pi_b, int n,
                                   Rng& rng) {
  OfflineDataset data;
  data.kind = DataKind::Trajectory;
  data.trajectories.reserve(n);
  for (int k = 0; k < n; ++k)
    data.trajectories.push_back(sample_trajectory(m, pi_b, rng));
  return data;
}

std::vector<std::vector<DataTuple>> flatten(const OfflineDataset& data,
                                            const Mtm& m) {
  std::vector<std::vector<DataTuple>> out(m.horizon - 1);
  if (data.kind == DataKind::Trajectory) {
    for (const Trajectory& tr : data.trajectories)
      for (int h = 0; h + 1 < m.horizon; ++h)
        out[h].push_back(
            {tr.states[h], tr.actions[h], tr.rewards[h], tr.states[h + 1]});
  } else {
    out = data.tuples;
  }
  return out;
}

}  // namespace ope
