#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "ope/hard_instances.hpp"
#include "ope/offline_data.hpp"
#include "test_util.hpp"

using namespace ope;

namespace {

Mdp two_layer_point_chain() {
  // Single state per layer, one action, fixed reward.
  Mdp m;
  m.mtm.init_layout(2, 1, {1, 1});
  m.mtm.initial = {1.0};
  m.mtm.row(0, 0, 0)[0] = 1.0;
  m.reward.assign(2, {RewardDist::constant(0.5)});
  m.reward[1] = {RewardDist::constant(0.25)};
  return m;
}

}  // namespace

TEST_CASE("general sampler: point mass, empty, and marginal accuracy") {
  SUBCASE("point-mass distribution gives identical tuples") {
    Mdp m = two_layer_point_chain();
    OfflineDistribution mu;
    mu.horizon = 2;
    mu.num_actions = 1;
    mu.mu = {{1.0}};
    Rng rng(1);
    OfflineDataset d = sample_general(m, mu, 50, rng);
    for (const DataTuple& t : d.tuples[0]) {
      CHECK(t.x == 0);
      CHECK(t.a == 0);
      CHECK(t.r == 0.5);
      CHECK(t.xp == 1);
    }
  }

  SUBCASE("n = 0 gives an empty dataset") {
    Mdp m = two_layer_point_chain();
    OfflineDistribution mu;
    mu.horizon = 2;
    mu.num_actions = 1;
    mu.mu = {{1.0}};
    Rng rng(1);
    OfflineDataset d = sample_general(m, mu, 0, rng);
    CHECK(d.tuples[0].empty());
  }

  SUBCASE("layer count mismatch is rejected") {
    Mdp m = two_layer_point_chain();
    OfflineDistribution mu;
    mu.horizon = 2;
    mu.num_actions = 1;
    mu.mu = {{1.0}, {1.0}};
    Rng rng(1);
    CHECK_THROWS_AS(sample_general(m, mu, 1, rng), InvariantError);
  }

  SUBCASE("empirical (x,a) frequencies track mu") {
    Mdp m = example_mdp(4);
    ExampleInstance inst = example_instance(4);
    OfflineDistribution mu = admissible_distribution(m.mtm, inst.pi_b);
    Rng rng(2);
    const int n = 100000;
    OfflineDataset d = sample_general(m, mu, n, rng);
    for (int h = 0; h < 3; ++h) {
      std::vector<double> freq(6, 0.0);
      for (const DataTuple& t : d.tuples[h])
        freq[m.mtm.index_of(t.x) * 2 + t.a] += 1.0 / n;
      double tv = 0.0;
      for (int k = 0; k < 6; ++k) tv += std::abs(freq[k] - mu.mu[h][k]);
      CHECK(tv / 2.0 <= 0.02);
    }
  }
}

TEST_CASE("admissible distribution equals the behavior occupancy") {
  const int H = 6;
  Mdp m = example_mdp(H);
  ExampleInstance inst = example_instance(H);
  OfflineDistribution mu = admissible_distribution(m.mtm, inst.pi_b);
  CHECK(mu.provenance == Provenance::Admissible);
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 2; ++a)
      CHECK(mu.mu[0][i * 2 + a] ==
            doctest::Approx(m.mtm.initial[i] * inst.pi_b.prob(i, a))
                .epsilon(1e-12));
  for (int h = 0; h + 1 < H; ++h)
    CHECK(mu.state_mass(h, 2) >= 0.25);

  // Uniform 2-action policy: mu(x,a) = d(x)/2.
  Policy uni = Policy::uniform(m.mtm);
  OfflineDistribution mu2 = admissible_distribution(m.mtm, uni);
  Occupancy occ = occupancy(m.mtm, uni);
  for (int h = 0; h + 1 < H; ++h)
    for (int i = 0; i < 3; ++i)
      for (int a = 0; a < 2; ++a)
        CHECK(mu2.mu[h][i * 2 + a] ==
              doctest::Approx(occ.state[h][i] / 2).epsilon(1e-12));
}

TEST_CASE("admissibility decision procedure") {
  SUBCASE("admissible distributions are certified with a witness") {
    Rng rng(21);
    for (int t = 0; t < 100; ++t) {
      Mtm m = testutil::random_mtm(rng);
      Policy pi = testutil::random_policy(m, rng);
      OfflineDistribution mu = admissible_distribution(m, pi);
      AdmissibleCheck res = check_admissible(mu, m);
      CHECK(res.admissible);
      // The witness reproduces mu.
      OfflineDistribution again = admissible_distribution(m, res.witness);
      for (int h = 0; h + 1 < m.horizon; ++h)
        for (std::size_t k = 0; k < mu.mu[h].size(); ++k)
          CHECK(std::abs(again.mu[h][k] - mu.mu[h][k]) < kIdentityTol);
    }
  }

  SUBCASE("mass on an unreachable state is refuted") {
    Mtm m;
    m.init_layout(3, 1, {1, 2, 1});
    m.initial = {1.0};
    m.row(0, 0, 0)[0] = 1.0;  // second state of layer 1 unreachable
    m.row(1, 0, 0)[0] = 1.0;
    m.row(1, 1, 0)[0] = 1.0;
    OfflineDistribution mu;
    mu.horizon = 3;
    mu.num_actions = 1;
    mu.mu = {{1.0}, {0.5, 0.5}};
    AdmissibleCheck res = check_admissible(mu, m);
    CHECK_FALSE(res.admissible);
    CHECK(res.refutation_layer == 1);
  }

  SUBCASE("a single-layer mixture of two occupancies is refuted") {
    const int H = 4;
    ExampleInstance inst = example_instance(H);
    OfflineDistribution d1 =
        admissible_distribution(inst.mtm, Policy::mixture(inst.mtm, {0.3, 0.7}));
    OfflineDistribution d2 =
        admissible_distribution(inst.mtm, Policy::mixture(inst.mtm, {0.7, 0.3}));
    OfflineDistribution mix = d1;
    for (std::size_t k = 0; k < mix.mu[1].size(); ++k)
      mix.mu[1][k] = 0.5 * (d1.mu[1][k] + d2.mu[1][k]);
    CHECK_FALSE(check_admissible(mix, inst.mtm).admissible);
  }
}

TEST_CASE("trajectory datasets: determinism, marginals, goodness of fit") {
  Mdp m = example_mdp(4);
  ExampleInstance inst = example_instance(4);

  SUBCASE("same seed reproduces the dataset") {
    Rng r1(9), r2(9);
    OfflineDataset a = sample_trajectories(m, inst.pi_b, 200, r1);
    OfflineDataset b = sample_trajectories(m, inst.pi_b, 200, r2);
    REQUIRE(a.trajectories.size() == b.trajectories.size());
    for (std::size_t k = 0; k < a.trajectories.size(); ++k) {
      CHECK(a.trajectories[k].states == b.trajectories[k].states);
      CHECK(a.trajectories[k].actions == b.trajectories[k].actions);
      CHECK(a.trajectories[k].rewards == b.trajectories[k].rewards);
    }
  }

  SUBCASE("per-layer (x,a) marginals match the behavior occupancy") {
    Rng rng(10);
    const int n = 100000;
    OfflineDataset d = sample_trajectories(m, inst.pi_b, n, rng);
    Occupancy occ = occupancy(m.mtm, inst.pi_b);
    auto tuples = flatten(d, m.mtm);
    for (int h = 0; h < 3; ++h) {
      std::vector<double> freq(6, 0.0);
      double chi2 = 0.0;
      for (const DataTuple& t : tuples[h])
        freq[m.mtm.index_of(t.x) * 2 + t.a] += 1.0;
      double tv = 0.0;
      int df = 0;
      for (int k = 0; k < 6; ++k) {
        double expect = occ.state_action[h][k] * n;
        tv += std::abs(freq[k] / n - occ.state_action[h][k]);
        if (expect > 0.0) {
          chi2 += (freq[k] - expect) * (freq[k] - expect) / expect;
          ++df;
        }
      }
      CHECK(tv / 2.0 <= 0.02);
      CHECK(chi2 <= testutil::chi2_crit_01(df - 1));
    }
  }

  SUBCASE("flatten keeps tuples on their layers") {
    Rng rng(11);
    OfflineDataset d = sample_trajectories(m, inst.pi_b, 50, rng);
    auto tuples = flatten(d, m.mtm);
    REQUIRE(tuples.size() == 3);
    for (int h = 0; h < 3; ++h) {
      CHECK(tuples[h].size() == 50);
      for (const DataTuple& t : tuples[h]) {
        CHECK(m.mtm.layer_of(t.x) == h);
        CHECK(m.mtm.layer_of(t.xp) == h + 1);
      }
    }
  }
}
