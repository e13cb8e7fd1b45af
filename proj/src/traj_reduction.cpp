#include "ope/traj_reduction.hpp"

#include <string>

namespace ope {

Policy deviation_policy(const Mtm& m, const Policy& pi_e) {
  if (m.num_actions < 2)
    throw InvariantError(
        "deviation policy needs at least two actions");
  if (!pi_e.deterministic())
    throw InvariantError("deviation policy requires a deterministic pi_e");
  Policy pi;
  pi.num_actions = m.num_actions;
  pi.dist.assign(m.num_states(), std::vector<double>(m.num_actions, 0.0));
  for (int g = 0; g < m.num_states(); ++g) {
    int avoid = pi_e.action(g);
    pi.dist[g][avoid == 0 ? 1 : 0] = 1.0;
  }
  return pi;
}

ReplicatedProblem replicate(const Mdp& base, const Policy& pi_e,
                            const Policy& pi_b, int K,
                            const std::vector<QFunction>& fclass) {
  validate(base);
  validate_policy(base.mtm, pi_e);
  validate_policy(base.mtm, pi_b);
  if (K < 1) throw InvariantError("replication count must be positive");
  if (!pi_e.deterministic())
    throw InvariantError("replicate requires a deterministic pi_e");
  deviation_policy(base.mtm, pi_e);  // rejects single-action models

  const Mtm& bm = base.mtm;
  const int H = bm.horizon;
  const int A = bm.num_actions;
  const int HT = (H - 1) * K + 1;
  Occupancy bocc = occupancy(bm, pi_b);

  ReplicatedProblem rp;
  rp.K = K;
  rp.base_horizon = H;

  Mtm lm;
  std::vector<int> sizes(HT);
  for (int l = 0; l < HT; ++l)
    sizes[l] = bm.layer_size[l == HT - 1 ? H - 1 : l / K];
  lm.init_layout(HT, A, sizes);
  lm.initial = bm.initial;

  for (int l = 0; l + 1 < HT; ++l) {
    const int h = l / K;
    const int k = l % K;
    for (int i = 0; i < sizes[l]; ++i)
      for (int a = 0; a < A; ++a) {
        double* out = lm.row(l, i, a);
        if (k < K - 1) {
          if (a == pi_e.action(bm.gid(h, i))) {
            out[i] = 1.0;
          } else {
            for (int j = 0; j < sizes[l]; ++j) out[j] = bocc.state[h][j];
          }
        } else {
          const double* row = bm.row(h, i, a);
          for (int j = 0; j < bm.layer_size[h + 1]; ++j) out[j] = row[j];
        }
      }
  }

  rp.mdp.mtm = lm;
  rp.mdp.reward.assign(HT, {});
  for (int l = 0; l < HT; ++l) {
    if (l == HT - 1) {
      rp.mdp.reward[l] = base.reward[H - 1];
    } else if (l % K == K - 1) {
      rp.mdp.reward[l] = base.reward[l / K];
    } else {
      rp.mdp.reward[l].assign(static_cast<std::size_t>(sizes[l]) * A,
                              RewardDist::constant(0.0));
    }
  }

  Policy base_o = deviation_policy(bm, pi_e);
  rp.pi_e.num_actions = rp.pi_b.num_actions = rp.pi_o.num_actions = A;
  rp.pi_e.dist.assign(lm.num_states(), {});
  rp.pi_b.dist.assign(lm.num_states(), {});
  rp.pi_o.dist.assign(lm.num_states(), {});
  for (int l = 0; l < HT; ++l) {
    const int h = l == HT - 1 ? H - 1 : l / K;
    const int k = l % K;
    for (int i = 0; i < sizes[l]; ++i) {
      int g = lm.gid(l, i);
      int bg = bm.gid(h, i);
      rp.pi_e.dist[g] = pi_e.dist[bg];
      rp.pi_o.dist[g] = base_o.dist[bg];
      if (l == HT - 1 || k == K - 1) {
        rp.pi_b.dist[g] = pi_b.dist[bg];
      } else {
        rp.pi_b.dist[g].assign(A, 0.0);
        rp.pi_b.dist[g][pi_e.action(bg)] += 0.5;
        rp.pi_b.dist[g][base_o.action(bg)] += 0.5;
      }
    }
  }

  if (!fclass.empty()) {
    OfflineDistribution lifted_mu = admissible_distribution(lm, rp.pi_b);
    for (const QFunction& f : fclass) {
      QFunction lf;
      lf.q = replicate_table(base, pi_e, pi_b, K, f.q);
      lf.w = w_table(lm, lifted_mu, rp.pi_e, lf.q);
      rp.fclass.push_back(lf);
    }
  }
  return rp;
}

std::vector<std::vector<double>> replicate_table(
    const Mdp& base, const Policy& pi_e, const Policy& pi_b, int K,
    const std::vector<std::vector<double>>& q) {
  const Mtm& bm = base.mtm;
  const int H = bm.horizon;
  const int A = bm.num_actions;
  const int HT = (H - 1) * K + 1;
  Occupancy bocc = occupancy(bm, pi_b);

  // Behavior-occupancy average of the on-policy value, one per base layer.
  std::vector<double> avg(H - 1, 0.0);
  for (int h = 0; h + 1 < H; ++h)
    for (int i = 0; i < bm.layer_size[h]; ++i) {
      int a = pi_e.action(bm.gid(h, i));
      avg[h] += bocc.state[h][i] * q[h][i * A + a];
    }

  std::vector<std::vector<double>> out(HT);
  for (int l = 0; l < HT; ++l) {
    const int h = l == HT - 1 ? H - 1 : l / K;
    const int k = l % K;
    if (l == HT - 1 || k == K - 1) {
      out[l] = q[h];
      continue;
    }
    out[l].assign(q[h].size(), 0.0);
    for (int i = 0; i < bm.layer_size[h]; ++i) {
      int ae = pi_e.action(bm.gid(h, i));
      for (int a = 0; a < A; ++a)
        out[l][i * A + a] = a == ae ? q[h][i * A + ae] : avg[h];
    }
  }
  return out;
}

Trajectory convert(const ReplicatedProblem& rp,
                   const std::vector<std::vector<DataTuple>>& blocks,
                   Rng& rng) {
  const Mtm& lm = rp.mdp.mtm;
  const int H = rp.base_horizon;
  const int K = rp.K;
  if (static_cast<int>(blocks.size()) != H - 1)
    throw InvariantError("converter needs one block per base layer");
  for (const auto& b : blocks)
    if (static_cast<int>(b.size()) != K)
      throw InvariantError("converter block must hold exactly K tuples");

  // Base-layer offsets, recovered from the block-boundary layer sizes.
  std::vector<int> base_offset(H, 0);
  for (int h = 0; h + 1 < H; ++h)
    base_offset[h + 1] = base_offset[h] + lm.layer_size[h * K];

  Trajectory tr;
  int i = blocks[0][0].x;  // base index within the current layer
  for (int h = 0; h + 1 < H; ++h) {
    if (h == 0) i -= base_offset[0];
    int l = 0;
    for (int k = 0; k + 1 < K; ++k) {
      int g = lm.gid(h * K + k, i);
      tr.states.push_back(g);
      tr.rewards.push_back(0.0);
      if (rng.next_double() < 0.5) {
        tr.actions.push_back(rp.pi_e.action(g));
      } else {
        tr.actions.push_back(rp.pi_o.action(g));
        ++l;
        i = blocks[h][l].x - base_offset[h];
      }
    }
    const DataTuple& t = blocks[h][l];
    tr.states.push_back(lm.gid(h * K + K - 1, i));
    tr.actions.push_back(t.a);
    tr.rewards.push_back(t.r);
    i = t.xp - base_offset[h + 1];
  }
  tr.states.push_back(lm.gid((H - 1) * K, i));
  return tr;
}

bool in_e0(const Trajectory& tr, const Policy& pi_e, int K,
           int base_horizon) {
  for (int h = 0; h + 1 < base_horizon; ++h) {
    bool all = true;
    for (int k = 0; k + 1 < K; ++k) {
      int l = h * K + k;
      if (tr.actions[l] != pi_e.action(tr.states[l])) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

double reduce_and_evaluate(const ReplicatedProblem& rp,
                           const std::vector<std::vector<DataTuple>>& tuples,
                           const TrajectoryEstimator& estimator, Rng& rng) {
  const int H = rp.base_horizon;
  const int K = rp.K;
  if (static_cast<int>(tuples.size()) != H - 1)
    throw InvariantError("reduction needs tuples for every base layer");
  const std::size_t per_layer = tuples[0].size();
  if (per_layer % K != 0)
    throw InvariantError("per-layer tuple count must be a multiple of K");
  for (const auto& layer : tuples)
    if (layer.size() != per_layer)
      throw InvariantError("all layers must supply the same tuple count");
  const std::size_t n = per_layer / K;

  const Mtm& lm = rp.mdp.mtm;
  const int last = lm.horizon - 1;
  std::vector<Trajectory> trajectories;
  trajectories.reserve(n);
  std::vector<std::vector<DataTuple>> blocks(H - 1);
  for (std::size_t t = 0; t < n; ++t) {
    for (int h = 0; h + 1 < H; ++h)
      blocks[h].assign(tuples[h].begin() + t * K,
                       tuples[h].begin() + (t + 1) * K);
    Trajectory tr = convert(rp, blocks, rng);
    // Terminal action and reward have no source tuple; draw them from the
    // replicated model itself.
    int g = tr.states.back();
    int i = g - lm.layer_offset[last];
    int a = rng.categorical(rp.pi_b.dist[g]);
    const RewardDist& rd = rp.mdp.reward[last][i * lm.num_actions + a];
    double r = rd.support[rd.prob.size() == 1 ? 0 : rng.categorical(rd.prob)];
    tr.actions.push_back(a);
    tr.rewards.push_back(r);
    trajectories.push_back(std::move(tr));
  }
  return estimator(trajectories, rp.fclass);
}

}  // namespace ope
