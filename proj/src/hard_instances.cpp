#include "ope/hard_instances.hpp"

#include <cmath>
#include <string>

namespace ope {

namespace {

// Per-cell evaluation action; rejects policies that vary inside a cell.
std::vector<std::vector<int>> cell_actions(const Mtm& m,
                                           const AggregationScheme& phi,
                                           const Policy& pi_e) {
  if (!pi_e.deterministic())
    throw InvariantError("pair construction requires a deterministic policy");
  std::vector<std::vector<int>> ae(m.horizon);
  for (int h = 0; h < m.horizon; ++h) {
    ae[h].assign(phi.num_cells(h), -1);
    for (int c = 0; c < phi.num_cells(h); ++c)
      for (int g : phi.cells[h][c]) {
        int a = pi_e.action(g);
        if (ae[h][c] == -1) ae[h][c] = a;
        if (ae[h][c] != a)
          throw InvariantError(
              "evaluation policy is not constant on cell " +
              std::to_string(c) + " of layer " + std::to_string(h));
      }
  }
  return ae;
}

QFunction exact_q(const Mdp& m, const Policy& pi_e,
                  const OfflineDistribution& mu) {
  QFunction f;
  f.q = value(m, pi_e).q;
  f.w = w_table(m.mtm, mu, pi_e, f.q);
  return f;
}

void shuffle(std::vector<int>& v, Rng& rng) {
  for (int i = static_cast<int>(v.size()) - 1; i > 0; --i)
    std::swap(v[i], v[rng.next_below(i + 1)]);
}

}  // namespace

std::vector<double> w_table(const Mtm& m, const OfflineDistribution& mu,
                            const Policy& pi_e,
                            const std::vector<std::vector<double>>& q) {
  if (!pi_e.deterministic())
    throw InvariantError("w_table requires a deterministic policy");
  std::vector<double> w(m.horizon - 1, 0.0);
  for (int h = 0; h + 1 < m.horizon; ++h)
    for (int i = 0; i < m.layer_size[h]; ++i) {
      int a = pi_e.action(m.gid(h, i));
      w[h] += mu.mu[h][i * m.num_actions + a] * q[h][i * m.num_actions + a];
    }
  return w;
}

ExampleInstance example_instance(int H) {
  if (H < 2) throw InvariantError("example_instance requires H >= 2");
  ExampleInstance inst;
  Mtm& m = inst.mtm;
  m.init_layout(H, 2, std::vector<int>(H, 3));
  m.initial = {(H - 1) / (2.0 * H), 1.0 / (2.0 * H), 0.5};
  for (int h = 0; h + 1 < H; ++h) {
    m.row(h, 0, 0)[1] = 1.0;  // advance one notch
    m.row(h, 1, 0)[2] = 1.0;
    m.row(h, 2, 0)[2] = 1.0;
    m.row(h, 0, 1)[0] = 0.5;  // lazy action: stay or fall to the sink
    m.row(h, 0, 1)[2] = 0.5;
    m.row(h, 1, 1)[1] = 0.5;
    m.row(h, 1, 1)[2] = 0.5;
    m.row(h, 2, 1)[2] = 1.0;
  }
  inst.phi.cells.assign(H, {});
  for (int h = 0; h < H; ++h)
    inst.phi.cells[h] = {{m.gid(h, 0), m.gid(h, 1)}, {m.gid(h, 2)}};
  inst.phi.finalize(m);
  inst.pi_e = Policy::fixed_action(m, 0);
  double p = 1.0 / (static_cast<double>(H) * H);
  inst.pi_b = Policy::mixture(m, {p, 1.0 - p});
  return inst;
}

Mdp example_mdp(int H) {
  ExampleInstance inst = example_instance(H);
  Mdp mdp;
  mdp.mtm = inst.mtm;
  mdp.reward.assign(H, std::vector<RewardDist>(3 * 2));
  for (int h = 0; h < H; ++h) {
    mdp.reward[h][0 * 2 + 0] = RewardDist::constant(1.0);
    mdp.reward[h][0 * 2 + 1] = RewardDist::constant(0.5);
    mdp.reward[h][1 * 2 + 0] = RewardDist::constant(-0.5);
    mdp.reward[h][1 * 2 + 1] = RewardDist::constant(-0.5);
    mdp.reward[h][2 * 2 + 0] = RewardDist::constant(0.25);
    mdp.reward[h][2 * 2 + 1] = RewardDist::constant(0.25);
  }
  return mdp;
}

AggregatedPair aggregated_pair(const Mtm& m, const AggregationScheme& phi,
                               const OfflineDistribution& mu,
                               const Policy& pi_e, double eps) {
  validate(m);
  auto ae = cell_actions(m, phi, pi_e);
  AggregatedModel agg = aggregate(m, mu, phi, pi_e);
  AggregatedConcentrability ac = aggregated_concentrability(agg, eps);
  if (!ac.feasible)
    throw InfeasibleError(
        "no cell subset carries the requested aggregated occupancy");
  AggregatedActionModel aam = aggregate_actions(m, mu, phi);

  AggregatedPair pair;
  pair.eps = eps;
  pair.h_star = ac.h_star;
  pair.cells = ac.witness;

  double mass = 0.0;
  for (int c : ac.witness) mass += agg.dbar[ac.h_star][c];
  double amp = eps / (2.0 * m.horizon * mass);

  Mtm cm;
  std::vector<int> sizes(m.horizon);
  for (int h = 0; h < m.horizon; ++h) sizes[h] = phi.num_cells(h);
  cm.init_layout(m.horizon, m.num_actions, sizes);
  cm.initial = agg.rhobar;
  for (int h = 0; h + 1 < m.horizon; ++h)
    for (int c = 0; c < sizes[h]; ++c)
      for (int a = 0; a < m.num_actions; ++a) {
        const auto& row = aam.tbar[h][c * m.num_actions + a];
        double* out = cm.row(h, c, a);
        for (int c2 = 0; c2 < sizes[h + 1]; ++c2) out[c2] = row[c2];
      }

  pair.m1.mtm = cm;
  pair.m2.mtm = cm;
  pair.m1.reward.assign(m.horizon, {});
  pair.m2.reward.assign(m.horizon, {});
  for (int h = 0; h < m.horizon; ++h) {
    pair.m1.reward[h].assign(sizes[h] * m.num_actions,
                             RewardDist::constant(0.0));
    pair.m2.reward[h] = pair.m1.reward[h];
  }
  for (int c : ac.witness) {
    pair.m1.reward[ac.h_star][c * m.num_actions + ae[ac.h_star][c]] =
        RewardDist::constant(amp);
    pair.m2.reward[ac.h_star][c * m.num_actions + ae[ac.h_star][c]] =
        RewardDist::constant(-amp);
  }

  pair.pi_e.num_actions = m.num_actions;
  pair.pi_e.dist.assign(cm.num_states(),
                        std::vector<double>(m.num_actions, 0.0));
  for (int h = 0; h < m.horizon; ++h)
    for (int c = 0; c < sizes[h]; ++c)
      pair.pi_e.dist[cm.gid(h, c)][ae[h][c]] = 1.0;

  pair.v1 = value(pair.m1, pair.pi_e).v_rho;
  pair.v2 = value(pair.m2, pair.pi_e).v_rho;
  return pair;
}

LatentPairSpec latent_pair(const Mtm& m, const AggregationScheme& phi,
                           const OfflineDistribution& mu, const Policy& pi_e,
                           double eps) {
  validate(m);
  const int H = m.horizon;
  const int A = m.num_actions;
  if (H < 3)
    throw InvariantError("latent_pair requires horizon >= 3");
  auto ae = cell_actions(m, phi, pi_e);
  AggregatedModel agg = aggregate(m, mu, phi, pi_e);
  AggregatedConcentrability ac = aggregated_concentrability(agg, eps);
  if (!ac.feasible)
    throw InfeasibleError(
        "no cell subset carries the requested aggregated occupancy");
  AggregatedActionModel aam = aggregate_actions(m, mu, phi);

  const double s = 1.0 - 2.0 / H;  // internal damping factor
  double mass = 0.0;
  for (int c : ac.witness) mass += agg.dbar[ac.h_star][c];
  mass *= std::pow(s, ac.h_star);  // occupancy of the damped chain
  const double amp = eps / (2.0 * H * mass);
  if (amp > 1.0)
    throw InvariantError(
        "accuracy parameter too large: pair rewards leave [-1, 1]");
  std::vector<char> in_witness_layer(phi.num_cells(ac.h_star), 0);
  for (int c : ac.witness) in_witness_layer[c] = 1;
  auto rbar1 = [&](int h, int c, int a) {
    return (h == ac.h_star && in_witness_layer[c] && a == ae[h][c]) ? amp
                                                                    : 0.0;
  };

  // Cell-level value backward induction for the first MDP; the second is its
  // negation on the original states.
  std::vector<std::vector<double>> qcell(H), vcell(H);
  std::vector<std::vector<double>> avg_b(H - 1);  // [h][c*A+a]
  for (int h = H - 1; h >= 0; --h) {
    const int nc = phi.num_cells(h);
    qcell[h].assign(static_cast<std::size_t>(nc) * A, 0.0);
    vcell[h].assign(nc, 0.0);
    if (h + 1 < H) {
      avg_b[h].assign(static_cast<std::size_t>(nc) * A, 0.0);
      for (int c = 0; c < nc; ++c)
        for (int a = 0; a < A; ++a) {
          double avg = 0.0;
          for (int g : phi.cells[h][c]) {
            int i = g - m.layer_offset[h];
            double b = 0.0;
            const double* row = m.row(h, i, a);
            for (int j = 0; j < m.layer_size[h + 1]; ++j)
              b += row[j] * vcell[h + 1][phi.cell_of[m.gid(h + 1, j)]];
            avg += aam.weight[h][i * A + a] * b;
          }
          avg_b[h][c * A + a] = avg;
          qcell[h][c * A + a] = rbar1(h, c, a) + s * avg;
        }
    } else {
      for (int c = 0; c < nc; ++c)
        for (int a = 0; a < A; ++a) qcell[h][c * A + a] = rbar1(h, c, a);
    }
    for (int c = 0; c < nc; ++c) vcell[h][c] = qcell[h][c * A + ae[h][c]];
  }

  // Augmented layout: original states, then u (+1 feeder), v (-1 feeder),
  // w (0 sink) at the end of each layer.
  LatentPairSpec spec;
  spec.eps = eps;
  spec.h_star = ac.h_star;
  spec.cells = ac.witness;
  std::vector<int> sizes(H);
  for (int h = 0; h < H; ++h) sizes[h] = m.layer_size[h] + 3;

  // The two MDPs perturb the u/v feeder probabilities in opposite
  // directions; the mu-weighted perturbations cancel inside every cell, so
  // the two models aggregate identically.
  auto build_mtm = [&](double sign) {
    Mtm am;
    am.init_layout(H, A, sizes);
    for (int i = 0; i < m.layer_size[0]; ++i) am.initial[i] = m.initial[i];
    for (int h = 0; h + 1 < H; ++h) {
      const int n = m.layer_size[h];
      const int un = m.layer_size[h + 1];  // next-layer u index
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < A; ++a) {
          int c = phi.cell_of[m.gid(h, i)];
          double b = 0.0;
          const double* row = m.row(h, i, a);
          for (int j = 0; j < un; ++j)
            b += row[j] * vcell[h + 1][phi.cell_of[m.gid(h + 1, j)]];
          double delta = sign * 0.5 * s * (avg_b[h][c * A + a] - b);
          if (std::abs(delta) > 1.0 / H + kStochasticTol)
            throw InvariantError(
                "accuracy parameter too large for a valid transition model");
          double* out = am.row(h, i, a);
          for (int j = 0; j < un; ++j) out[j] = s * row[j];
          out[un] = 1.0 / H + delta;
          out[un + 1] = 1.0 / H - delta;
        }
      for (int a = 0; a < A; ++a) {
        am.row(h, n, a)[un + 2] = 1.0;      // u -> w
        am.row(h, n + 1, a)[un + 2] = 1.0;  // v -> w
        am.row(h, n + 2, a)[un + 2] = 1.0;  // w -> w
      }
    }
    return am;
  };

  auto build_mdp = [&](double sign) {
    Mdp mdp;
    mdp.mtm = build_mtm(sign);
    mdp.reward.assign(H, {});
    for (int h = 0; h < H; ++h) {
      const int n = m.layer_size[h];
      mdp.reward[h].assign(sizes[h] * A, RewardDist::constant(0.0));
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < A; ++a)
          mdp.reward[h][i * A + a] = RewardDist::constant(
              sign * rbar1(h, phi.cell_of[m.gid(h, i)], a));
      for (int a = 0; a < A; ++a) {
        mdp.reward[h][n * A + a] = RewardDist::constant(1.0);
        mdp.reward[h][(n + 1) * A + a] = RewardDist::constant(-1.0);
      }
    }
    return mdp;
  };
  spec.m1 = build_mdp(1.0);
  spec.m2 = build_mdp(-1.0);
  const Mtm& am = spec.m1.mtm;  // layouts agree; only the deltas differ

  spec.pi_e.num_actions = A;
  spec.pi_e.dist.assign(am.num_states(), std::vector<double>(A, 0.0));
  for (int h = 0; h < H; ++h) {
    const int n = m.layer_size[h];
    for (int i = 0; i < n; ++i)
      spec.pi_e.dist[am.gid(h, i)] = pi_e.dist[m.gid(h, i)];
    for (int i = n; i < sizes[h]; ++i) spec.pi_e.dist[am.gid(h, i)][0] = 1.0;
  }

  spec.mu_prime.horizon = H;
  spec.mu_prime.num_actions = A;
  spec.mu_prime.mu.assign(H - 1, {});
  for (int h = 0; h + 1 < H; ++h) {
    const int n = m.layer_size[h];
    spec.mu_prime.mu[h].assign(sizes[h] * A, 0.0);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < A; ++a)
        spec.mu_prime.mu[h][i * A + a] = 0.5 * mu.mu[h][i * A + a];
    for (int k = 0; k < 3; ++k)
      spec.mu_prime.mu[h][(n + k) * A + 0] = 1.0 / 6.0;
  }

  spec.phi.cells.assign(H, {});
  for (int h = 0; h < H; ++h) {
    const int n = m.layer_size[h];
    for (const auto& cell : phi.cells[h]) {
      std::vector<int> lifted;
      for (int g : cell)
        lifted.push_back(am.gid(h, g - m.layer_offset[h]));
      spec.phi.cells[h].push_back(lifted);
    }
    for (int k = 0; k < 3; ++k)
      spec.phi.cells[h].push_back({am.gid(h, n + k)});
  }
  spec.phi.finalize(am);

  auto build_q = [&](double sign) {
    QFunction f;
    f.q.assign(H, {});
    for (int h = 0; h < H; ++h) {
      const int n = m.layer_size[h];
      f.q[h].assign(sizes[h] * A, 0.0);
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < A; ++a)
          f.q[h][i * A + a] =
              sign * qcell[h][phi.cell_of[m.gid(h, i)] * A + a];
      for (int a = 0; a < A; ++a) {
        f.q[h][n * A + a] = 1.0;
        f.q[h][(n + 1) * A + a] = -1.0;
      }
    }
    f.w = w_table(am, spec.mu_prime, spec.pi_e, f.q);
    return f;
  };
  spec.fclass = {build_q(1.0), build_q(-1.0)};

  spec.v1 = value(spec.m1, spec.pi_e).v_rho;
  spec.v2 = value(spec.m2, spec.pi_e).v_rho;
  return spec;
}

BlockLift block_lift(const Mdp& base, const AggregationScheme& phi,
                     const OfflineDistribution& mu, const Policy& pi_e,
                     const std::vector<std::vector<int>>& pool_size,
                     Rng& rng) {
  const Mtm& m = base.mtm;
  const int H = m.horizon;
  const int A = m.num_actions;
  validate(m, mu);
  if (static_cast<int>(pool_size.size()) != H)
    throw InvariantError("pool sizes must cover every layer");

  BlockLift lift;
  Mtm lm;
  std::vector<int> sizes(H, 0);
  for (int h = 0; h < H; ++h) {
    if (static_cast<int>(pool_size[h].size()) != phi.num_cells(h))
      throw InvariantError("pool sizes must cover every cell");
    for (int c = 0; c < phi.num_cells(h); ++c) {
      int cell = static_cast<int>(phi.cells[h][c].size());
      if (pool_size[h][c] <= 0 || pool_size[h][c] % cell != 0)
        throw InvariantError("pool size not a positive multiple of cell " +
                             std::to_string(c) + " at layer " +
                             std::to_string(h));
      sizes[h] += pool_size[h][c];
    }
  }
  lm.init_layout(H, A, sizes);

  // Decoder: within each pool, every latent state gets the same number of
  // observations, assigned by a random shuffle.
  lift.psi.assign(lm.num_states(), -1);
  lift.pools.cells.assign(H, {});
  std::vector<int> copies(m.num_states(), 0);  // |X_psi(z)|
  for (int h = 0; h < H; ++h) {
    int next = 0;
    for (int c = 0; c < phi.num_cells(h); ++c) {
      const auto& cell = phi.cells[h][c];
      int per = pool_size[h][c] / static_cast<int>(cell.size());
      std::vector<int> targets;
      for (int g : cell) {
        copies[g] = per;
        for (int k = 0; k < per; ++k) targets.push_back(g);
      }
      shuffle(targets, rng);
      std::vector<int> pool;
      for (int t : targets) {
        int gx = lm.gid(h, next++);
        lift.psi[gx] = t;
        pool.push_back(gx);
      }
      lift.pools.cells[h].push_back(pool);
    }
  }
  lift.pools.finalize(lm);

  for (int i = 0; i < lm.layer_size[0]; ++i) {
    int z = lift.psi[lm.gid(0, i)];
    lm.initial[i] = m.initial[z] / copies[z];
  }
  for (int h = 0; h + 1 < H; ++h)
    for (int i = 0; i < lm.layer_size[h]; ++i) {
      int z = lift.psi[lm.gid(h, i)];
      int zi = z - m.layer_offset[h];
      for (int a = 0; a < A; ++a) {
        const double* row = m.row(h, zi, a);
        double* out = lm.row(h, i, a);
        for (int j = 0; j < lm.layer_size[h + 1]; ++j) {
          int zp = lift.psi[lm.gid(h + 1, j)];
          out[j] = row[zp - m.layer_offset[h + 1]] / copies[zp];
        }
      }
    }

  lift.mdp.mtm = lm;
  lift.mdp.reward.assign(H, {});
  for (int h = 0; h < H; ++h) {
    lift.mdp.reward[h].assign(lm.layer_size[h] * A, RewardDist());
    for (int i = 0; i < lm.layer_size[h]; ++i) {
      int z = lift.psi[lm.gid(h, i)];
      int zi = z - m.layer_offset[h];
      for (int a = 0; a < A; ++a)
        lift.mdp.reward[h][i * A + a] =
            RewardDist::pm_one(base.mean_reward(h, zi, a));
    }
  }

  lift.pi_e.num_actions = A;
  lift.pi_e.dist.assign(lm.num_states(), {});
  for (int g = 0; g < lm.num_states(); ++g)
    lift.pi_e.dist[g] = pi_e.dist[lift.psi[g]];

  lift.mu.horizon = H;
  lift.mu.num_actions = A;
  lift.mu.provenance = mu.provenance;
  lift.mu.mu.assign(H - 1, {});
  for (int h = 0; h + 1 < H; ++h) {
    lift.mu.mu[h].assign(lm.layer_size[h] * A, 0.0);
    for (int i = 0; i < lm.layer_size[h]; ++i) {
      int z = lift.psi[lm.gid(h, i)];
      int zi = z - m.layer_offset[h];
      for (int a = 0; a < A; ++a)
        lift.mu.mu[h][i * A + a] = mu.mu[h][zi * A + a] / copies[z];
    }
  }
  return lift;
}

BlockLift block_lift(const Mdp& base, const AggregationScheme& phi,
                     const OfflineDistribution& mu, const Policy& pi_e,
                     int multiplier, Rng& rng) {
  std::vector<std::vector<int>> pool_size(base.mtm.horizon);
  for (int h = 0; h < base.mtm.horizon; ++h)
    for (const auto& cell : phi.cells[h])
      pool_size[h].push_back(multiplier * static_cast<int>(cell.size()));
  return block_lift(base, phi, mu, pi_e, pool_size, rng);
}

std::vector<std::vector<double>> lift_table(
    const BlockLift& lift, const Mtm& base,
    const std::vector<std::vector<double>>& q) {
  const Mtm& lm = lift.mdp.mtm;
  const int A = lm.num_actions;
  std::vector<std::vector<double>> out(lm.horizon);
  for (int h = 0; h < lm.horizon; ++h) {
    out[h].assign(lm.layer_size[h] * A, 0.0);
    for (int i = 0; i < lm.layer_size[h]; ++i) {
      int zi = lift.psi[lm.gid(h, i)] - base.layer_offset[h];
      for (int a = 0; a < A; ++a) out[h][i * A + a] = q[h][zi * A + a];
    }
  }
  return out;
}

QFunction lift_q(const BlockLift& lift, const Mtm& base, const QFunction& f) {
  QFunction out;
  out.q = lift_table(lift, base, f.q);
  out.w = f.w;
  return out;
}

AgnosticPair agnostic_admissible_instance(int N, Rng& rng) {
  if (N < 1) throw InvariantError("agnostic instance requires N >= 1");
  const int mid = 4 * N * N;
  const int half = mid / 2;
  Mtm m;
  m.init_layout(3, 2, {1, mid, 1});
  m.initial = {1.0};
  std::vector<int> ids(mid);
  for (int i = 0; i < mid; ++i) ids[i] = i;
  shuffle(ids, rng);
  std::vector<char> first_half(mid, 0);
  for (int k = 0; k < half; ++k) first_half[ids[k]] = 1;
  for (int j = 0; j < mid; ++j) {
    m.row(0, 0, first_half[j] ? 0 : 1)[j] = 1.0 / half;
    m.row(1, j, 0)[0] = 1.0;
    m.row(1, j, 1)[0] = 1.0;
  }

  Policy pi_e = Policy::fixed_action(m, 0);
  Policy pi_b = Policy::uniform(m);
  OfflineDistribution mu = admissible_distribution(m, pi_b);

  AggregationScheme phi;
  phi.cells.assign(3, {});
  phi.cells[0] = {{m.gid(0, 0)}};
  phi.cells[1].assign(2, {});
  for (int j = 0; j < mid; ++j)
    phi.cells[1][first_half[j] ? 0 : 1].push_back(m.gid(1, j));
  phi.cells[2] = {{m.gid(2, 0)}};
  phi.finalize(m);

  auto make = [&](bool reward_on_first) {
    OpeProblem p;
    p.mdp.mtm = m;
    p.mdp.reward.assign(3, {});
    p.mdp.reward[0].assign(2, RewardDist::constant(0.0));
    p.mdp.reward[1].assign(mid * 2, RewardDist::constant(0.0));
    p.mdp.reward[2].assign(2, RewardDist::constant(0.0));
    for (int j = 0; j < mid; ++j)
      if (static_cast<bool>(first_half[j]) == reward_on_first)
        for (int a = 0; a < 2; ++a)
          p.mdp.reward[1][j * 2 + a] = RewardDist::constant(1.0);
    p.pi_e = pi_e;
    p.pi_b = pi_b;
    p.mu = mu;
    p.phi = phi;
    return p;
  };
  AgnosticPair pair;
  pair.p1 = make(true);
  pair.p2 = make(false);
  std::vector<QFunction> fclass = {exact_q(pair.p1.mdp, pi_e, mu),
                                   exact_q(pair.p2.mdp, pi_e, mu)};
  pair.p1.fclass = fclass;
  pair.p2.fclass = fclass;
  pair.p1.realizable = pair.p2.realizable = true;
  return pair;
}

AgnosticPair agnostic_trajectory_instance(int H, Rng& rng) {
  if (H < 2) throw InvariantError("agnostic instance requires H >= 2");
  const int N = 1 << H;
  Mtm m;
  std::vector<int> sizes(H + 1, N);
  sizes[0] = 1;
  m.init_layout(H + 1, 2, sizes);
  m.initial = {1.0};

  // first_half[h][i] marks the states the persistent action keeps reaching.
  std::vector<std::vector<char>> first_half(H + 1);
  first_half[0] = {1};
  for (int h = 1; h <= H; ++h) {
    std::vector<int> ids(N);
    for (int i = 0; i < N; ++i) ids[i] = i;
    shuffle(ids, rng);
    first_half[h].assign(N, 0);
    for (int k = 0; k < N / 2; ++k) first_half[h][ids[k]] = 1;
  }
  for (int h = 0; h < H; ++h)
    for (int i = 0; i < m.layer_size[h]; ++i) {
      for (int j = 0; j < N; ++j) {
        if (static_cast<bool>(first_half[h + 1][j]) ==
            static_cast<bool>(first_half[h][i]))
          m.row(h, i, 0)[j] = 2.0 / N;
        m.row(h, i, 1)[j] = 1.0 / N;
      }
    }

  Policy pi_e = Policy::fixed_action(m, 0);
  Policy pi_b = Policy::uniform(m);
  OfflineDistribution mu;  // explicit uniform over (state, action)
  mu.horizon = H + 1;
  mu.num_actions = 2;
  mu.mu.assign(H, {});
  for (int h = 0; h < H; ++h)
    mu.mu[h].assign(m.layer_size[h] * 2,
                    1.0 / (2.0 * m.layer_size[h]));

  AggregationScheme phi;
  phi.cells.assign(H + 1, {});
  phi.cells[0] = {{m.gid(0, 0)}};
  for (int h = 1; h <= H; ++h) {
    phi.cells[h].assign(2, {});
    for (int i = 0; i < N; ++i)
      phi.cells[h][first_half[h][i] ? 0 : 1].push_back(m.gid(h, i));
  }
  phi.finalize(m);

  auto make = [&](bool reward_on_first) {
    OpeProblem p;
    p.mdp.mtm = m;
    p.mdp.reward.assign(H + 1, {});
    for (int h = 0; h <= H; ++h)
      p.mdp.reward[h].assign(m.layer_size[h] * 2, RewardDist::constant(0.0));
    for (int i = 0; i < N; ++i)
      if (static_cast<bool>(first_half[H][i]) == reward_on_first)
        for (int a = 0; a < 2; ++a)
          p.mdp.reward[H][i * 2 + a] = RewardDist::constant(1.0);
    p.pi_e = pi_e;
    p.pi_b = pi_b;
    p.mu = mu;
    p.phi = phi;
    return p;
  };
  AgnosticPair pair;
  pair.p1 = make(true);
  pair.p2 = make(false);
  std::vector<QFunction> fclass = {exact_q(pair.p1.mdp, pi_e, mu),
                                   exact_q(pair.p2.mdp, pi_e, mu)};
  pair.p1.fclass = fclass;
  pair.p2.fclass = fclass;
  pair.p1.realizable = pair.p2.realizable = true;
  return pair;
}

}  // namespace ope
