// Compares the OpenMP pair-loop of bvft_select against the serial reference
// on a block-lifted instance with a widened function class, and checks that
// both produce bitwise-identical reports.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "ope/bvft.hpp"
#include "ope/hard_instances.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int members = argc > 1 ? std::atoi(argv[1]) : 16;
  const int n = argc > 2 ? std::atoi(argv[2]) : 20000;
  ope::Rng rng(20240817);

  ope::ExampleInstance inst = ope::example_instance(4);
  ope::Mdp base = ope::example_mdp(4);
  ope::OfflineDistribution mu =
      ope::admissible_distribution(base.mtm, inst.pi_b);
  ope::BlockLift lift =
      ope::block_lift(base, inst.phi, mu, inst.pi_e, 8, rng);

  ope::VFunction exact = ope::to_v_form(
      lift.mdp.mtm, lift.pi_e,
      ope::lift_table(lift, base.mtm, ope::value(base, inst.pi_e).q));
  ope::ValueFunctionClass fc;
  fc.members.push_back(exact);
  for (int k = 1; k < members; ++k) {
    ope::VFunction f = exact;
    for (auto& layer : f)
      for (double& v : layer) v += 0.05 * (rng.next_double() - 0.5);
    fc.members.push_back(f);
  }

  ope::OfflineDataset data = ope::sample_general(lift.mdp, lift.mu, n, rng);

  ope::Rng r1 = rng.derive(1), r2 = rng.derive(1);
  auto t0 = Clock::now();
  ope::BvftReport par = ope::bvft_select(lift.mdp.mtm, data, fc, lift.pi_e,
                                         r1, /*parallel=*/true);
  double par_s = seconds_since(t0);
  t0 = Clock::now();
  ope::BvftReport ser = ope::bvft_select(lift.mdp.mtm, data, fc, lift.pi_e,
                                         r2, /*parallel=*/false);
  double ser_s = seconds_since(t0);

  bool identical = par.selected == ser.selected &&
                   par.estimate == ser.estimate && par.loss == ser.loss;
  std::printf("members\t%d\nsamples\t%d\n", members, n);
  std::printf("parallel_seconds\t%.6f\nserial_seconds\t%.6f\n", par_s, ser_s);
  std::printf("speedup\t%.2f\n", ser_s / par_s);
  std::printf("identical\t%s\n", identical ? "yes" : "no");
  return identical ? 0 : 1;
}
