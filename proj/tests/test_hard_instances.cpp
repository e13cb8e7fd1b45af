#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "ope/hard_instances.hpp"
#include "ope/serialize.hpp"
#include "test_util.hpp"

using namespace ope;

TEST_CASE("example chain structure") {
  CHECK_THROWS_AS(example_instance(1), InvariantError);
  const int H = 12;
  ExampleInstance inst = example_instance(H);
  CHECK_NOTHROW(validate(inst.mtm));
  CHECK_NOTHROW(validate(example_mdp(H)));
  CHECK(inst.pi_e.deterministic());
  CHECK_FALSE(inst.pi_b.deterministic());
  CHECK(inst.pi_b.prob(0, 0) == doctest::Approx(1.0 / (H * H)));

  // The merged cell keeps constant aggregated occupancy at the last layer.
  OfflineDistribution mu = admissible_distribution(inst.mtm, inst.pi_b);
  AggregatedModel agg = aggregate(inst.mtm, mu, inst.phi, inst.pi_e);
  CHECK(agg.dbar[H - 1][0] >= 1.0 / 41.0);
}

TEST_CASE("aggregated reward pair") {
  const int H = 6;
  ExampleInstance inst = example_instance(H);
  OfflineDistribution mu = admissible_distribution(inst.mtm, inst.pi_b);
  const double eps = 1.0 / 15.0;
  AggregatedPair pair = aggregated_pair(inst.mtm, inst.phi, mu, inst.pi_e, eps);
  CHECK_NOTHROW(validate(pair.m1));
  CHECK_NOTHROW(validate(pair.m2));
  CHECK(pair.v1 == doctest::Approx(eps / (2.0 * H)).epsilon(1e-12));
  CHECK(pair.v2 == doctest::Approx(-eps / (2.0 * H)).epsilon(1e-12));

  ValueTable v1 = value(pair.m1, pair.pi_e);
  ValueTable v2 = value(pair.m2, pair.pi_e);
  for (int h = 0; h < H; ++h)
    for (std::size_t i = 0; i < v1.v[h].size(); ++i) {
      CHECK(v1.v[h][i] == doctest::Approx(-v2.v[h][i]).epsilon(1e-12));
      CHECK(v1.v[h][i] >= 0.0);
      CHECK(v1.v[h][i] <= 1.0 / (2.0 * H) + 1e-12);
    }

  // Rewards live only on the witness layer.
  for (int h = 0; h < H; ++h)
    if (h != pair.h_star)
      for (const auto& r : pair.m1.reward[h]) CHECK(r.mean() == 0.0);
}

TEST_CASE("latent pair: value gap, balance, damping, realizability") {
  for (int H : {4, 6, 8}) {
    CAPTURE(H);
    ExampleInstance inst = example_instance(H);
    Mdp base = example_mdp(H);
    OfflineDistribution mu = admissible_distribution(inst.mtm, inst.pi_b);
    const double eps = 0.01;
    LatentPairSpec spec = latent_pair(inst.mtm, inst.phi, mu, inst.pi_e, eps);

    CHECK_NOTHROW(validate(spec.m1));
    CHECK_NOTHROW(validate(spec.m2));
    CHECK(std::abs(spec.v1 - spec.v2 - eps / H) < 1e-9);

    // The class holds the exact action values of both models.
    ValueTable q1 = value(spec.m1, spec.pi_e);
    ValueTable q2 = value(spec.m2, spec.pi_e);
    REQUIRE(spec.fclass.size() == 2);
    for (int h = 0; h < H; ++h)
      for (std::size_t k = 0; k < q1.q[h].size(); ++k) {
        CHECK(std::abs(spec.fclass[0].q[h][k] - q1.q[h][k]) < 1e-9);
        CHECK(std::abs(spec.fclass[1].q[h][k] - q2.q[h][k]) < 1e-9);
      }
    std::vector<double> w1 =
        w_table(spec.m1.mtm, spec.mu_prime, spec.pi_e, spec.fclass[0].q);
    for (int h = 0; h + 1 < H; ++h)
      CHECK(std::abs(spec.fclass[0].w[h] - w1[h]) < 1e-9);

    // Action values are constant on aggregation cells.
    for (int h = 0; h < H; ++h)
      for (const auto& cell : spec.phi.cells[h])
        for (int g : cell)
          for (int a = 0; a < 2; ++a)
            CHECK(spec.fclass[0].q[h][spec.m1.mtm.index_of(g) * 2 + a] ==
                  doctest::Approx(
                      spec.fclass[0].q[h][spec.m1.mtm.index_of(cell[0]) * 2 + a])
                      .epsilon(1e-12));

    // Data-weighted cell transitions agree between the two models.
    AggregatedActionModel acts =
        aggregate_actions(spec.m1.mtm, spec.mu_prime, spec.phi);
    for (int h = 0; h + 1 < H; ++h)
      for (const auto& cell : spec.phi.cells[h])
        for (int a = 0; a < 2; ++a)
          for (int j = 0; j < spec.m1.mtm.layer_size[h + 1]; ++j) {
            double p1 = 0.0, p2 = 0.0;
            for (int g : cell) {
              int i = spec.m1.mtm.index_of(g);
              double w = acts.weight[h][i * 2 + a];
              p1 += w * spec.m1.mtm.row(h, i, a)[j];
              p2 += w * spec.m2.mtm.row(h, i, a)[j];
            }
            CHECK(std::abs(p1 - p2) < 1e-12);
          }

    // Occupancy of the original states is damped by exactly (1 - 2/H)^h.
    double s = 1.0 - 2.0 / H;
    Occupancy base_occ = occupancy(inst.mtm, inst.pi_e);
    for (const Mdp* aug : {&spec.m1, &spec.m2}) {
      Occupancy occ = occupancy(aug->mtm, spec.pi_e);
      for (int h = 0; h < H; ++h)
        for (int i = 0; i < 3; ++i)
          CHECK(std::abs(occ.state[h][i] -
                         std::pow(s, h) * base_occ.state[h][i]) < 1e-12);
      CHECK(standard_concentrability(aug->mtm, spec.mu_prime, spec.pi_e) <=
            6.0 * standard_concentrability(inst.mtm, mu, inst.pi_e) + 1e-9);
    }
    (void)base;
  }
}

TEST_CASE("latent pair rejects bad parameters") {
  ExampleInstance inst = example_instance(2);
  OfflineDistribution mu = admissible_distribution(inst.mtm, inst.pi_b);
  CHECK_THROWS_AS(latent_pair(inst.mtm, inst.phi, mu, inst.pi_e, 0.01),
                  InvariantError);

  ExampleInstance ok = example_instance(4);
  OfflineDistribution mu4 = admissible_distribution(ok.mtm, ok.pi_b);
  CHECK_THROWS_AS(latent_pair(ok.mtm, ok.phi, mu4, ok.pi_e, 1.5),
                  InvariantError);
  CHECK_THROWS_AS(latent_pair(ok.mtm, ok.phi, mu4, Policy::uniform(ok.mtm),
                              0.01),
                  InvariantError);
}

TEST_CASE("block lift: decoder identities") {
  const int H = 4;
  ExampleInstance inst = example_instance(H);
  Mdp base = example_mdp(H);
  OfflineDistribution mu = admissible_distribution(inst.mtm, inst.pi_b);
  ValueTable base_val = value(base, inst.pi_e);
  Occupancy base_occ = occupancy(inst.mtm, inst.pi_e);
  double base_c = standard_concentrability(inst.mtm, mu, inst.pi_e);
  AggregatedConcentrability base_cbar = aggregated_concentrability(
      aggregate(inst.mtm, mu, inst.phi, inst.pi_e), 1.0 / 15.0);

  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(500 + trial);
    BlockLift lift = block_lift(base, inst.phi, mu, inst.pi_e, 4, rng);
    CHECK_NOTHROW(validate(lift.mdp));
    CHECK_NOTHROW(validate(lift.mdp.mtm, lift.mu));

    auto lifted_q = lift_table(lift, inst.mtm, base_val.q);
    ValueTable val = value(lift.mdp, lift.pi_e);
    Occupancy occ = occupancy(lift.mdp.mtm, lift.pi_e);
    for (int h = 0; h < H; ++h) {
      for (std::size_t k = 0; k < val.q[h].size(); ++k)
        CHECK(std::abs(val.q[h][k] - lifted_q[h][k]) < 1e-9);
      for (int i = 0; i < lift.mdp.mtm.layer_size[h]; ++i) {
        int z = lift.psi[lift.mdp.mtm.gid(h, i)];
        CHECK(std::abs(occ.state[h][i] -
                       base_occ.state[h][inst.mtm.index_of(z)] / 4.0) < 1e-9);
      }
    }

    // Concentrability is untouched by the lift.
    CHECK(standard_concentrability(lift.mdp.mtm, lift.mu, lift.pi_e) == base_c);
    AggregatedConcentrability cbar = aggregated_concentrability(
        aggregate(lift.mdp.mtm, lift.mu, lift.pools, lift.pi_e), 1.0 / 15.0);
    CHECK(cbar.value == doctest::Approx(base_cbar.value).epsilon(1e-12));
    CHECK(cbar.h_star == base_cbar.h_star);
  }
}

TEST_CASE("block lift: lifted classes do not depend on the decoder") {
  const int H = 4;
  ExampleInstance inst = example_instance(H);
  Mdp base = example_mdp(H);
  OfflineDistribution mu = admissible_distribution(inst.mtm, inst.pi_b);

  // Cell-constant table: value depends only on (layer, cell, action).
  std::vector<std::vector<double>> table(H);
  for (int h = 0; h < H; ++h) {
    table[h].assign(6, 0.0);
    for (int i = 0; i < 3; ++i)
      for (int a = 0; a < 2; ++a)
        table[h][i * 2 + a] =
            0.1 * (h + 1) * (inst.phi.cell_of[inst.mtm.gid(h, i)] + 1) +
            0.01 * a;
  }
  std::vector<std::vector<std::vector<double>>> lifted;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(900 + trial);
    BlockLift lift = block_lift(base, inst.phi, mu, inst.pi_e, 4, rng);
    lifted.push_back(lift_table(lift, inst.mtm, table));
  }
  for (std::size_t k = 1; k < lifted.size(); ++k) CHECK(lifted[k] == lifted[0]);
}

TEST_CASE("block lift rejects pools that do not tile the cells") {
  ExampleInstance inst = example_instance(3);
  Mdp base = example_mdp(3);
  OfflineDistribution mu = admissible_distribution(inst.mtm, inst.pi_b);
  Rng rng(1);
  std::vector<std::vector<int>> pools = {{4, 2}, {3, 2}, {4, 2}};
  CHECK_THROWS_AS(block_lift(base, inst.phi, mu, inst.pi_e, pools, rng),
                  InvariantError);
  pools[1] = {0, 2};
  CHECK_THROWS_AS(block_lift(base, inst.phi, mu, inst.pi_e, pools, rng),
                  InvariantError);
}

TEST_CASE("block-lifted latent pair stays realizable") {
  const int H = 3;
  ExampleInstance inst = example_instance(H);
  OfflineDistribution mu = admissible_distribution(inst.mtm, inst.pi_b);
  LatentPairSpec spec = latent_pair(inst.mtm, inst.phi, mu, inst.pi_e, 0.12);
  Rng rng(77);
  BlockLift lift =
      block_lift(spec.m1, spec.phi, spec.mu_prime, spec.pi_e, 8, rng);
  QFunction lifted = lift_q(lift, spec.m1.mtm, spec.fclass[0]);
  ValueTable val = value(lift.mdp, lift.pi_e);
  for (int h = 0; h < H; ++h)
    for (std::size_t k = 0; k < val.q[h].size(); ++k)
      CHECK(std::abs(val.q[h][k] - lifted.q[h][k]) < 1e-9);
  std::vector<double> w =
      w_table(lift.mdp.mtm, lift.mu, lift.pi_e, lifted.q);
  for (int h = 0; h + 1 < H; ++h)
    CHECK(std::abs(w[h] - lifted.w[h]) < 1e-9);
}

TEST_CASE("agnostic pair with admissible data") {
  Rng rng(13);
  AgnosticPair pair = agnostic_admissible_instance(2, rng);
  CHECK_NOTHROW(validate(pair.p1.mdp));
  CHECK(value(pair.p1.mdp, pair.p1.pi_e).v_rho == doctest::Approx(1.0));
  CHECK(value(pair.p2.mdp, pair.p2.pi_e).v_rho == doctest::Approx(0.0));

  // Uniform behavior spreads the middle layer uniformly.
  Occupancy occ = occupancy(pair.p1.mdp.mtm, *pair.p1.pi_b);
  for (double v : occ.state[1]) CHECK(v == doctest::Approx(1.0 / 16.0));
  CHECK(check_admissible(*pair.p1.mu, pair.p1.mdp.mtm).admissible);
  CHECK(pushforward_concentrability(pair.p1.mdp.mtm, *pair.p1.mu).c_pf <=
        8.0 + 1e-9);
  REQUIRE(pair.p1.fclass.size() == 2);
  ValueTable q1 = value(pair.p1.mdp, pair.p1.pi_e);
  for (int h = 0; h < 3; ++h)
    for (std::size_t k = 0; k < q1.q[h].size(); ++k)
      CHECK(std::abs(pair.p1.fclass[0].q[h][k] - q1.q[h][k]) < 1e-9);
}

TEST_CASE("agnostic pair with trajectory data") {
  Rng rng(14);
  const int H = 3;
  AgnosticPair pair = agnostic_trajectory_instance(H, rng);
  CHECK_NOTHROW(validate(pair.p1.mdp));
  CHECK(pair.p1.mdp.mtm.horizon == H + 1);
  CHECK(value(pair.p1.mdp, pair.p1.pi_e).v_rho == doctest::Approx(1.0));
  CHECK(value(pair.p2.mdp, pair.p2.pi_e).v_rho == doctest::Approx(0.0));
  PushforwardConcentrability pf =
      pushforward_concentrability(pair.p1.mdp.mtm, *pair.p1.mu);
  CHECK(pf.c_pf == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(pair.p1.realizable);
}

TEST_CASE("problem serialization round-trips byte for byte") {
  ExampleInstance inst = example_instance(4);
  OfflineDistribution mu = admissible_distribution(inst.mtm, inst.pi_b);
  LatentPairSpec spec = latent_pair(inst.mtm, inst.phi, mu, inst.pi_e, 0.01);
  OpeProblem p;
  p.mdp = spec.m1;
  p.pi_e = spec.pi_e;
  p.mu = spec.mu_prime;
  p.phi = spec.phi;
  p.fclass = spec.fclass;
  p.eps = spec.eps;
  p.realizable = true;

  std::string text = serialize_problem(p);
  OpeProblem back = parse_problem(text);
  CHECK(serialize_problem(back) == text);
  CHECK(back.mdp.mtm.horizon == 4);
  CHECK(back.realizable);
  CHECK(back.fclass.size() == 2);
  CHECK(value(back.mdp, back.pi_e).v_rho == doctest::Approx(spec.v1));

  CHECK(fnv1a("") == 14695981039346656037ull);
  CHECK(fnv1a("a") != fnv1a("b"));
  CHECK_THROWS_AS(parse_problem("garbage"), InvariantError);
}
