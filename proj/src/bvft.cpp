#include "ope/bvft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ope {

VFunction to_v_form(const Mtm& m, const Policy& pi_e,
                    const std::vector<std::vector<double>>& q) {
  VFunction f(m.horizon);
  for (int h = 0; h < m.horizon; ++h) {
    f[h].assign(m.layer_size[h], 0.0);
    for (int i = 0; i < m.layer_size[h]; ++i)
      for (int a = 0; a < m.num_actions; ++a)
        f[h][i] += pi_e.prob(m.gid(h, i), a) * q[h][i * m.num_actions + a];
  }
  return f;
}

FilteredDataset preprocess(const OfflineDataset& data, const Mtm& m,
                           const Policy& pi_e, Rng& rng) {
  auto tuples = flatten(data, m);
  const bool det = pi_e.deterministic();
  FilteredDataset out;
  out.samples.assign(m.horizon - 1, {});
  out.n.assign(m.horizon - 1, 0);
  out.n_kept.assign(m.horizon - 1, 0);
  for (int h = 0; h + 1 < m.horizon; ++h) {
    out.n[h] = tuples[h].size();
    for (const DataTuple& t : tuples[h]) {
      bool keep = det ? t.a == pi_e.action(t.x)
                      : rng.categorical(pi_e.dist[t.x]) == t.a;
      if (keep) out.samples[h].push_back({t.x, t.r, t.xp});
    }
    out.n_kept[h] = out.samples[h].size();
  }
  return out;
}

std::vector<std::vector<double>> empirical_weights(const FilteredDataset& d,
                                                   const Mtm& m) {
  std::vector<std::vector<double>> nu(m.horizon);
  for (int h = 0; h < m.horizon; ++h) nu[h].assign(m.layer_size[h], 0.0);
  for (int h = 0; h + 1 < m.horizon; ++h) {
    if (d.n[h] == 0) continue;
    for (const auto& s : d.samples[h])
      nu[h][m.index_of(s.x)] += 1.0 / static_cast<double>(d.n[h]);
  }
  return nu;
}

AggregationScheme induced_partition(const Mtm& m, const VFunction& f,
                                    const VFunction& g) {
  AggregationScheme phi;
  phi.cells.assign(m.horizon, {});
  for (int h = 0; h < m.horizon; ++h) {
    std::map<std::pair<double, double>, int> seen;
    for (int i = 0; i < m.layer_size[h]; ++i) {
      auto key = std::make_pair(f[h][i], g[h][i]);
      auto it = seen.find(key);
      if (it == seen.end()) {
        it = seen.emplace(key, static_cast<int>(phi.cells[h].size())).first;
        phi.cells[h].push_back({});
      }
      phi.cells[h][it->second].push_back(m.gid(h, i));
    }
  }
  phi.finalize(m);
  return phi;
}

VFunction bellman_image(const Mdp& m, const Policy& pi_e, const VFunction& f) {
  const Mtm& t = m.mtm;
  VFunction out(t.horizon);
  for (int h = 0; h < t.horizon; ++h) {
    out[h].assign(t.layer_size[h], 0.0);
    for (int i = 0; i < t.layer_size[h]; ++i) {
      double v = 0.0;
      for (int a = 0; a < t.num_actions; ++a) {
        double p = pi_e.prob(t.gid(h, i), a);
        if (p == 0.0) continue;
        double q = m.mean_reward(h, i, a);
        if (h + 1 < t.horizon) {
          const double* row = t.row(h, i, a);
          for (int j = 0; j < t.layer_size[h + 1]; ++j)
            q += row[j] * f[h + 1][j];
        }
        v += p * q;
      }
      out[h][i] = v;
    }
  }
  return out;
}

VFunction exact_projection(const Mdp& m, const Policy& pi_e,
                           const std::vector<std::vector<double>>& nu,
                           const VFunction& f, const AggregationScheme& phi) {
  const Mtm& t = m.mtm;
  VFunction tf = bellman_image(m, pi_e, f);
  VFunction out(t.horizon);
  for (int h = 0; h < t.horizon; ++h) {
    out[h].assign(t.layer_size[h], 0.0);
    for (const auto& cell : phi.cells[h]) {
      double mass = 0.0, sum = 0.0;
      for (int g : cell) {
        int i = t.index_of(g);
        mass += nu[h][i];
        sum += nu[h][i] * tf[h][i];
      }
      double avg = mass > 0.0 ? sum / mass : 0.0;
      for (int g : cell) out[h][t.index_of(g)] = avg;
    }
  }
  return out;
}

VFunction empirical_projection(const FilteredDataset& d, const Mtm& m,
                               const VFunction& f,
                               const AggregationScheme& phi) {
  VFunction out(m.horizon);
  std::vector<double> sum, count;
  for (int h = 0; h < m.horizon; ++h) out[h].assign(m.layer_size[h], 0.0);
  for (int h = 0; h + 1 < m.horizon; ++h) {
    const int nc = phi.num_cells(h);
    sum.assign(nc, 0.0);
    count.assign(nc, 0.0);
    for (const auto& s : d.samples[h]) {
      int c = phi.cell_of[s.x];
      sum[c] += s.r + f[h + 1][m.index_of(s.xp)];
      count[c] += 1.0;
    }
    for (int c = 0; c < nc; ++c) {
      if (count[c] == 0.0) continue;
      double avg = sum[c] / count[c];
      for (int g : phi.cells[h][c]) out[h][m.index_of(g)] = avg;
    }
  }
  return out;
}

double weighted_norm(const std::vector<double>& nu,
                     const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += nu[i] * g[i] * g[i];
  return std::sqrt(s);
}

namespace {

struct PairResult {
  double loss = 0.0;
  std::size_t phi_max = 0;
};

PairResult pair_loss(const Mtm& m, const FilteredDataset& d,
                     const std::vector<std::vector<double>>& nu_hat,
                     const VFunction& fi, const VFunction& fj) {
  AggregationScheme phi = induced_partition(m, fi, fj);
  VFunction g = empirical_projection(d, m, fi, phi);
  PairResult res;
  for (int h = 0; h < m.horizon; ++h) {
    std::vector<double> diff(m.layer_size[h]);
    for (int i = 0; i < m.layer_size[h]; ++i) diff[i] = fi[h][i] - g[h][i];
    res.loss = std::max(res.loss, weighted_norm(nu_hat[h], diff));
    res.phi_max =
        std::max(res.phi_max, static_cast<std::size_t>(phi.num_cells(h)));
  }
  return res;
}

}  // namespace

BvftReport bvft_select(const Mtm& m, const OfflineDataset& data,
                       const ValueFunctionClass& fclass, const Policy& pi_e,
                       Rng& rng, bool parallel) {
  const int nf = static_cast<int>(fclass.members.size());
  if (nf == 0) throw InvariantError("bvft_select needs a nonempty class");
  FilteredDataset d = preprocess(data, m, pi_e, rng);
  auto nu_hat = empirical_weights(d, m);

  BvftReport report;
  report.loss.assign(nf, std::vector<double>(nf, 0.0));
  std::vector<std::size_t> phis(static_cast<std::size_t>(nf) * nf, 0);
  const int pairs = nf * nf;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
  for (int p = 0; p < pairs; ++p) {
    int i = p / nf, j = p % nf;
    PairResult res =
        pair_loss(m, d, nu_hat, fclass.members[i], fclass.members[j]);
    report.loss[i][j] = res.loss;
    phis[p] = res.phi_max;
  }
  (void)parallel;
  for (std::size_t p : phis) report.phi_max = std::max(report.phi_max, p);

  int best = 0;
  double best_loss = kInf;
  for (int i = 0; i < nf; ++i) {
    double worst = 0.0;
    for (int j = 0; j < nf; ++j) worst = std::max(worst, report.loss[i][j]);
    if (worst < best_loss) {
      best_loss = worst;
      best = i;
    }
  }
  report.selected = best;
  for (int i = 0; i < m.layer_size[0]; ++i)
    report.estimate += m.initial[i] * fclass.members[best][0][i];

  std::size_t n_min = SIZE_MAX;
  for (std::size_t n : d.n) n_min = std::min(n_min, n);
  if (n_min != SIZE_MAX && n_min > 0)
    report.eps_stat = std::sqrt(
        std::log(std::max<double>(
            2.0, 2.0 * nf * nf * m.horizon *
                     static_cast<double>(std::max<std::size_t>(
                         report.phi_max, 1)) /
                     0.05)) /
        static_cast<double>(n_min));
  return report;
}

ValueFunctionClass discretize_class(const ValueFunctionClass& fclass,
                                    double eps, double cbar, int horizon) {
  if (!(eps > 0.0) || cbar < 1.0)
    throw InvariantError("discretize_class requires eps > 0 and cbar >= 1");
  const double step = eps / (horizon * std::sqrt(cbar));
  ValueFunctionClass out = fclass;
  for (auto& f : out.members)
    for (auto& layer : f)
      for (double& v : layer) v = step * std::round(v / step);
  return out;
}

}  // namespace ope
