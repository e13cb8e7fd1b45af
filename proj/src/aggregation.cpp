#include "ope/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ope {

void AggregationScheme::finalize(const Mtm& m) {
  if (static_cast<int>(cells.size()) != m.horizon)
    throw InvariantError("aggregation scheme must cover every layer");
  cell_of.assign(m.num_states(), -1);
  for (int h = 0; h < m.horizon; ++h) {
    int covered = 0;
    for (int c = 0; c < num_cells(h); ++c)
      for (int g : cells[h][c]) {
        if (m.layer_of(g) != h)
          throw InvariantError("aggregation cell crosses layers");
        if (cell_of[g] != -1)
          throw InvariantError("aggregation cells overlap");
        cell_of[g] = c;
        ++covered;
      }
    if (covered != m.layer_size[h])
      throw InvariantError("aggregation cells do not cover a layer");
  }
}

AggregatedModel aggregate(const Mtm& m, const OfflineDistribution& mu,
                          const AggregationScheme& phi, const Policy& pi,
                          bool appendix_d_base) {
  validate(m, mu);
  AggregatedModel agg;
  agg.horizon = m.horizon;
  agg.tbar.assign(m.horizon - 1, {});
  agg.dbar.assign(m.horizon, {});
  agg.rhobar.assign(phi.num_cells(0), 0.0);
  for (int i = 0; i < m.layer_size[0]; ++i)
    agg.rhobar[phi.cell_of[m.gid(0, i)]] += m.initial[i];

  const bool det = pi.deterministic();
  if (det) agg.nubar.assign(m.horizon - 1, {});

  for (int h = 0; h + 1 < m.horizon; ++h) {
    const int nc = phi.num_cells(h);
    const int ncn = phi.num_cells(h + 1);
    agg.tbar[h].assign(nc, std::vector<double>(ncn, 0.0));
    if (det) agg.nubar[h].assign(nc, 0.0);
    for (int c = 0; c < nc; ++c) {
      double weight = 0.0;
      for (int g : phi.cells[h][c]) {
        int i = g - m.layer_offset[h];
        for (int a = 0; a < m.num_actions; ++a) {
          double w = pi.prob(g, a) * mu.mu[h][i * m.num_actions + a];
          if (w == 0.0) continue;
          weight += w;
          const double* row = m.row(h, i, a);
          for (int j = 0; j < m.layer_size[h + 1]; ++j)
            agg.tbar[h][c][phi.cell_of[m.gid(h + 1, j)]] += w * row[j];
        }
        if (det)
          agg.nubar[h][c] += mu.mu[h][i * m.num_actions + pi.action(g)];
      }
      if (weight > 0.0) {
        for (double& v : agg.tbar[h][c]) v /= weight;
      } else {
        // Eq. (1) is undefined here; fall back to a uniform row and flag the
        // model so callers can assert they never relied on it.
        std::fill(agg.tbar[h][c].begin(), agg.tbar[h][c].end(), 1.0 / ncn);
        agg.partially_defined = true;
        agg.zero_weight_cells.emplace_back(h, c);
      }
    }
  }

  agg.dbar[0] = agg.rhobar;
  if (appendix_d_base)
    for (double& v : agg.dbar[0]) v /= m.horizon;
  for (int h = 0; h + 1 < m.horizon; ++h) {
    agg.dbar[h + 1].assign(phi.num_cells(h + 1), 0.0);
    for (int c = 0; c < phi.num_cells(h); ++c)
      for (int c2 = 0; c2 < phi.num_cells(h + 1); ++c2)
        agg.dbar[h + 1][c2] += agg.dbar[h][c] * agg.tbar[h][c][c2];
  }
  return agg;
}

AggregatedActionModel aggregate_actions(const Mtm& m,
                                        const OfflineDistribution& mu,
                                        const AggregationScheme& phi) {
  validate(m, mu);
  AggregatedActionModel agg;
  agg.horizon = m.horizon;
  agg.tbar.assign(m.horizon - 1, {});
  agg.weight.assign(m.horizon - 1, {});
  for (int h = 0; h + 1 < m.horizon; ++h) {
    const int nc = phi.num_cells(h);
    const int ncn = phi.num_cells(h + 1);
    agg.tbar[h].assign(static_cast<std::size_t>(nc) * m.num_actions,
                       std::vector<double>(ncn, 0.0));
    agg.weight[h].assign(
        static_cast<std::size_t>(m.layer_size[h]) * m.num_actions, 0.0);
    for (int c = 0; c < nc; ++c) {
      for (int a = 0; a < m.num_actions; ++a) {
        double mass = 0.0;
        for (int g : phi.cells[h][c])
          mass += mu.mu[h][(g - m.layer_offset[h]) * m.num_actions + a];
        auto& row = agg.tbar[h][c * m.num_actions + a];
        for (int g : phi.cells[h][c]) {
          int i = g - m.layer_offset[h];
          double w =
              mass > 0.0
                  ? mu.mu[h][i * m.num_actions + a] / mass
                  : 1.0 / static_cast<double>(phi.cells[h][c].size());
          agg.weight[h][i * m.num_actions + a] = w;
          const double* trow = m.row(h, i, a);
          for (int j = 0; j < m.layer_size[h + 1]; ++j)
            row[phi.cell_of[m.gid(h + 1, j)]] += w * trow[j];
        }
        if (mass <= 0.0) {
          agg.partially_defined = true;
          agg.zero_weight_cells.emplace_back(h, c * m.num_actions + a);
        }
      }
    }
  }
  return agg;
}

double standard_concentrability(const Mtm& m, const OfflineDistribution& mu,
                                const Policy& pi_e) {
  validate(m, mu);
  Occupancy occ = occupancy(m, pi_e);
  double best = 0.0;
  for (int h = 0; h + 1 < m.horizon; ++h)
    for (std::size_t k = 0; k < mu.mu[h].size(); ++k) {
      double d = occ.state_action[h][k];
      double mass = mu.mu[h][k];
      if (d == 0.0) continue;  // 0/0 = 0
      double ratio = mass > 0.0 ? d / mass : kInf;
      best = std::max(best, ratio);
    }
  return best;
}

double all_policy_concentrability(const Mtm& m,
                                  const OfflineDistribution& mu) {
  validate(m, mu);
  double best = 0.0;
  for (int ht = 0; ht + 1 < m.horizon; ++ht) {
    for (int j = 0; j < m.layer_size[ht]; ++j) {
      // Largest probability any policy can place on state j at layer ht.
      std::vector<double> u(m.layer_size[ht], 0.0);
      u[j] = 1.0;
      for (int h = ht - 1; h >= 0; --h) {
        std::vector<double> prev(m.layer_size[h], 0.0);
        for (int i = 0; i < m.layer_size[h]; ++i) {
          double bestq = 0.0;
          for (int a = 0; a < m.num_actions; ++a) {
            double q = 0.0;
            const double* row = m.row(h, i, a);
            for (int k = 0; k < m.layer_size[h + 1]; ++k) q += row[k] * u[k];
            bestq = std::max(bestq, q);
          }
          prev[i] = bestq;
        }
        u.swap(prev);
      }
      double occ_max = 0.0;
      for (int i = 0; i < m.layer_size[0]; ++i) occ_max += m.initial[i] * u[i];
      if (occ_max == 0.0) continue;
      for (int a = 0; a < m.num_actions; ++a) {
        double mass = mu.mu[ht][j * m.num_actions + a];
        best = std::max(best, mass > 0.0 ? occ_max / mass : kInf);
      }
    }
  }
  return best;
}

namespace {

// better-than comparison with a deterministic tie rule: keep the incumbent.
bool improves(double candidate, double incumbent) {
  return candidate > incumbent;
}

}  // namespace

AggregatedConcentrability aggregated_concentrability(
    const AggregatedModel& agg, double eps, int max_exact_cells) {
  if (!(eps > 0.0) || eps > 1.0)
    throw InvariantError("aggregated concentrability requires eps in (0,1]");
  if (agg.nubar.empty())
    throw InvariantError(
        "aggregated concentrability requires a deterministic evaluation "
        "policy");
  AggregatedConcentrability out;
  out.value = -kInf;
  for (int h = 0; h + 1 < agg.horizon; ++h) {
    const int nc = static_cast<int>(agg.dbar[h].size());
    const auto& d = agg.dbar[h];
    const auto& nu = agg.nubar[h];
    if (nc <= max_exact_cells) {
      for (unsigned mask = 1; mask < (1u << nc); ++mask) {
        double ds = 0.0, ns = 0.0;
        for (int c = 0; c < nc; ++c)
          if (mask & (1u << c)) {
            ds += d[c];
            ns += nu[c];
          }
        if (ds < eps) continue;
        double ratio = ns > 0.0 ? ds / ns : kInf;
        if (!out.feasible || improves(ratio, out.value)) {
          out.feasible = true;
          out.value = ratio;
          out.h_star = h;
          out.witness.clear();
          for (int c = 0; c < nc; ++c)
            if (mask & (1u << c)) out.witness.push_back(c);
        }
      }
    } else {
      // Certified lower bound: best feasible prefix under d/nu ordering.
      std::vector<int> order(nc);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int x, int y) {
        double rx = nu[x] > 0.0 ? d[x] / nu[x] : (d[x] > 0.0 ? kInf : 0.0);
        double ry = nu[y] > 0.0 ? d[y] / nu[y] : (d[y] > 0.0 ? kInf : 0.0);
        if (rx != ry) return rx > ry;
        return x < y;
      });
      double ds = 0.0, ns = 0.0;
      std::vector<int> prefix;
      for (int c : order) {
        ds += d[c];
        ns += nu[c];
        prefix.push_back(c);
        if (ds < eps) continue;
        double ratio = ns > 0.0 ? ds / ns : kInf;
        if (!out.feasible || improves(ratio, out.value)) {
          out.feasible = true;
          out.value = ratio;
          out.h_star = h;
          out.witness = prefix;
          out.exact = false;
        }
      }
    }
  }
  if (!out.feasible) {
    out.value = 0.0;
    return out;
  }
  if (out.exact) std::sort(out.witness.begin(), out.witness.end());
  return out;
}

PushforwardConcentrability pushforward_concentrability(
    const Mtm& m, const OfflineDistribution& mu) {
  validate(m, mu);
  PushforwardConcentrability pf;
  pf.c_a = 0.0;
  pf.c_x = 0.0;
  for (int h = 0; h + 1 < m.horizon; ++h)
    for (int i = 0; i < m.layer_size[h]; ++i) {
      double mass = mu.state_mass(h, i);
      for (int a = 0; a < m.num_actions; ++a) {
        double cond =
            mass > 0.0 ? mu.mu[h][i * m.num_actions + a] / mass : 0.0;
        pf.c_a = std::max(pf.c_a, cond > 0.0 ? 1.0 / cond : kInf);
      }
    }
  for (int i = 0; i < m.layer_size[0]; ++i) {
    double rho = m.initial[i];
    if (rho == 0.0) continue;
    double mass = mu.state_mass(0, i);
    pf.c_x = std::max(pf.c_x, mass > 0.0 ? rho / mass : kInf);
  }
  for (int h = 0; h + 2 < m.horizon; ++h)
    for (int i = 0; i < m.layer_size[h]; ++i)
      for (int a = 0; a < m.num_actions; ++a) {
        const double* row = m.row(h, i, a);
        for (int j = 0; j < m.layer_size[h + 1]; ++j) {
          if (row[j] == 0.0) continue;
          double mass = mu.state_mass(h + 1, j);
          pf.c_x = std::max(pf.c_x, mass > 0.0 ? row[j] / mass : kInf);
        }
      }
  pf.c_pf = pf.c_x * pf.c_a;
  return pf;
}

std::vector<double> w_function(const Mdp& m, const OfflineDistribution& mu,
                               const Policy& pi_e) {
  validate(m.mtm, mu);
  if (!pi_e.deterministic())
    throw InvariantError("w_function requires a deterministic policy");
  ValueTable val = value(m, pi_e);
  std::vector<double> w(m.mtm.horizon - 1, 0.0);
  for (int h = 0; h + 1 < m.mtm.horizon; ++h)
    for (int i = 0; i < m.mtm.layer_size[h]; ++i) {
      int a = pi_e.action(m.mtm.gid(h, i));
      w[h] += mu.mu[h][i * m.mtm.num_actions + a] *
              val.q[h][i * m.mtm.num_actions + a];
    }
  return w;
}

}  // namespace ope
