#include "ope/mdp.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

namespace ope {

namespace {

std::string loc(int h, int i, int a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "layer %d state %d action %d", h, i, a);
  return buf;
}

void check_prob_vector(const double* p, int n, const std::string& where) {
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    if (p[j] < -kStochasticTol)
      throw InvariantError("negative probability at " + where);
    sum += p[j];
  }
  if (std::abs(sum - 1.0) > kStochasticTol)
    throw InvariantError("row not stochastic at " + where);
}

}  // namespace

void Mtm::init_layout(int H, int A, const std::vector<int>& sizes) {
  horizon = H;
  num_actions = A;
  layer_size = sizes;
  layer_offset.assign(H, 0);
  for (int h = 1; h < H; ++h)
    layer_offset[h] = layer_offset[h - 1] + layer_size[h - 1];
  transition.assign(H - 1, {});
  for (int h = 0; h + 1 < H; ++h)
    transition[h].assign(
        static_cast<std::size_t>(layer_size[h]) * A * layer_size[h + 1], 0.0);
  initial.assign(layer_size[0], 0.0);
}

bool Policy::deterministic() const {
  for (const auto& row : dist)
    for (double p : row)
      if (p != 0.0 && p != 1.0) return false;
  return true;
}

int Policy::action(int g) const {
  int best = 0;
  for (int a = 1; a < num_actions; ++a)
    if (dist[g][a] > dist[g][best]) best = a;
  return best;
}

Policy Policy::uniform(const Mtm& m) {
  std::vector<double> w(m.num_actions, 1.0 / m.num_actions);
  return mixture(m, w);
}

Policy Policy::fixed_action(const Mtm& m, int a) {
  std::vector<double> w(m.num_actions, 0.0);
  w[a] = 1.0;
  return mixture(m, w);
}

Policy Policy::mixture(const Mtm& m, const std::vector<double>& weights) {
  Policy pi;
  pi.num_actions = m.num_actions;
  pi.dist.assign(m.num_states(), weights);
  return pi;
}

void validate(const Mtm& m) {
  if (m.horizon < 1) throw InvariantError("horizon must be positive");
  check_prob_vector(m.initial.data(), static_cast<int>(m.initial.size()),
                    "initial distribution");
  for (int h = 0; h + 1 < m.horizon; ++h)
    for (int i = 0; i < m.layer_size[h]; ++i)
      for (int a = 0; a < m.num_actions; ++a)
        check_prob_vector(m.row(h, i, a), m.layer_size[h + 1], loc(h, i, a));
}

void validate(const Mdp& m) {
  validate(m.mtm);
  for (int h = 0; h < m.mtm.horizon; ++h)
    for (int i = 0; i < m.mtm.layer_size[h]; ++i)
      for (int a = 0; a < m.mtm.num_actions; ++a) {
        const RewardDist& r = m.reward[h][i * m.mtm.num_actions + a];
        if (r.support.size() != r.prob.size() || r.support.empty())
          throw InvariantError("malformed reward distribution at " +
                               loc(h, i, a));
        check_prob_vector(r.prob.data(), static_cast<int>(r.prob.size()),
                          "reward distribution at " + loc(h, i, a));
        for (double v : r.support)
          if (v < -1.0 - kStochasticTol || v > 1.0 + kStochasticTol)
            throw InvariantError("reward outside [-1,1] at " + loc(h, i, a));
      }
}

void validate_policy(const Mtm& m, const Policy& pi) {
  if (pi.num_actions != m.num_actions ||
      static_cast<int>(pi.dist.size()) != m.num_states())
    throw InvariantError("policy shape does not match model");
  for (int g = 0; g < m.num_states(); ++g)
    check_prob_vector(pi.dist[g].data(), m.num_actions, "policy at state " +
                                                            std::to_string(g));
}

Occupancy occupancy(const Mtm& m, const Policy& pi) {
  Occupancy occ;
  occ.state.assign(m.horizon, {});
  occ.state_action.assign(m.horizon, {});
  occ.state[0] = m.initial;
  for (int h = 0; h < m.horizon; ++h) {
    const int n = m.layer_size[h];
    occ.state_action[h].assign(static_cast<std::size_t>(n) * m.num_actions,
                               0.0);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < m.num_actions; ++a)
        occ.state_action[h][i * m.num_actions + a] =
            occ.state[h][i] * pi.prob(m.gid(h, i), a);
    if (h + 1 < m.horizon) {
      occ.state[h + 1].assign(m.layer_size[h + 1], 0.0);
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < m.num_actions; ++a) {
          double w = occ.state_action[h][i * m.num_actions + a];
          if (w == 0.0) continue;
          const double* row = m.row(h, i, a);
          for (int j = 0; j < m.layer_size[h + 1]; ++j)
            occ.state[h + 1][j] += w * row[j];
        }
    }
  }
  return occ;
}

ValueTable value(const Mdp& m, const Policy& pi) {
  const Mtm& t = m.mtm;
  ValueTable val;
  val.q.assign(t.horizon, {});
  val.v.assign(t.horizon, {});
  for (int h = t.horizon - 1; h >= 0; --h) {
    const int n = t.layer_size[h];
    val.q[h].assign(static_cast<std::size_t>(n) * t.num_actions, 0.0);
    val.v[h].assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < t.num_actions; ++a) {
        double q = m.mean_reward(h, i, a);
        if (h + 1 < t.horizon) {
          const double* row = t.row(h, i, a);
          for (int j = 0; j < t.layer_size[h + 1]; ++j)
            q += row[j] * val.v[h + 1][j];
        }
        val.q[h][i * t.num_actions + a] = q;
      }
      double v = 0.0;
      for (int a = 0; a < t.num_actions; ++a)
        v += pi.prob(t.gid(h, i), a) * val.q[h][i * t.num_actions + a];
      val.v[h][i] = v;
    }
  }
  for (int i = 0; i < t.layer_size[0]; ++i)
    val.v_rho += t.initial[i] * val.v[0][i];
  return val;
}

Trajectory sample_trajectory(const Mdp& m, const Policy& pi, Rng& rng) {
  const Mtm& t = m.mtm;
  Trajectory tr;
  int i = rng.categorical(t.initial);
  for (int h = 0; h < t.horizon; ++h) {
    int g = t.gid(h, i);
    int a = rng.categorical(pi.dist[g]);
    const RewardDist& rd = m.reward[h][i * t.num_actions + a];
    double r = rd.support[rd.prob.size() == 1 ? 0 : rng.categorical(rd.prob)];
    tr.states.push_back(g);
    tr.actions.push_back(a);
    tr.rewards.push_back(r);
    if (h + 1 < t.horizon) i = rng.categorical(t.row(h, i, a), t.layer_size[h + 1]);
  }
  return tr;
}

double is_estimate(const std::vector<Trajectory>& trajectories,
                   const Policy& pi_e, const Policy& pi_b) {
  if (trajectories.empty())
    throw InvariantError("is_estimate: empty trajectory set");
  double total = 0.0;
  for (const Trajectory& tr : trajectories) {
    double weight = 1.0;
    double ret = 0.0;
    for (std::size_t h = 0; h < tr.states.size(); ++h) {
      int g = tr.states[h];
      int a = tr.actions[h];
      double pb = pi_b.prob(g, a);
      if (pb <= 0.0)
        throw InvariantError(
            "is_estimate: behavior policy has zero mass on a logged action");
      weight *= pi_e.prob(g, a) / pb;
      ret += tr.rewards[h];
    }
    total += weight * ret;
  }
  return total / static_cast<double>(trajectories.size());
}

}  // namespace ope
