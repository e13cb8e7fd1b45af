#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ope/bvft.hpp"
#include "ope/hard_instances.hpp"
#include "ope/serialize.hpp"
#include "ope/traj_reduction.hpp"
#include "ope/version.hpp"

using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  double epsilon = 1.0 / 15.0;
  long samples = 1000;
  int replication = 2;
};

std::string default_out(const std::string& name) {
  const char* dir = std::getenv("OPE_OUT_DIR");
  if (dir && *dir) return std::string(dir) + "/" + name;
  return name;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

json load_config(const Options& opt, std::string* raw) {
  if (opt.config.empty()) {
    *raw = "{}";
    return json::object();
  }
  *raw = read_file(opt.config);
  json cfg = json::parse(*raw, nullptr, false);
  if (cfg.is_discarded())
    throw ConfigError("config is not valid JSON: " + opt.config);
  return cfg;
}

ope::QFunction exact_member(const ope::Mdp& m, const ope::Policy& pi_e,
                            const ope::OfflineDistribution& mu) {
  ope::QFunction f;
  f.q = ope::value(m, pi_e).q;
  f.w = ope::w_table(m.mtm, mu, pi_e, f.q);
  return f;
}

ope::OpeProblem make_problem(const json& cfg, const Options& opt) {
  std::string family = cfg.value("family", "example");
  ope::Rng rng(opt.seed, ope::fnv1a(family));
  double eps = cfg.value("epsilon", opt.epsilon);

  if (family == "example") {
    int H = cfg.value("H", 4);
    ope::ExampleInstance inst = ope::example_instance(H);
    ope::OpeProblem p;
    p.mdp = ope::example_mdp(H);
    p.pi_e = inst.pi_e;
    p.pi_b = inst.pi_b;
    p.mu = ope::admissible_distribution(p.mdp.mtm, inst.pi_b);
    p.phi = inst.phi;
    p.fclass = {exact_member(p.mdp, p.pi_e, *p.mu)};
    p.eps = eps;
    p.realizable = true;
    return p;
  }
  if (family == "aggregated-pair" || family == "latent-pair") {
    int H = cfg.value("H", 4);
    int kind = cfg.value("kind", 1);
    ope::ExampleInstance inst = ope::example_instance(H);
    ope::Mdp base = ope::example_mdp(H);
    ope::OfflineDistribution mu =
        ope::admissible_distribution(base.mtm, inst.pi_b);
    ope::OpeProblem p;
    if (family == "aggregated-pair") {
      ope::AggregatedPair pair =
          ope::aggregated_pair(base.mtm, inst.phi, mu, inst.pi_e, eps);
      p.mdp = kind == 2 ? pair.m2 : pair.m1;
      p.pi_e = pair.pi_e;
    } else {
      ope::LatentPairSpec spec =
          ope::latent_pair(base.mtm, inst.phi, mu, inst.pi_e, eps);
      p.mdp = kind == 2 ? spec.m2 : spec.m1;
      p.pi_e = spec.pi_e;
      p.mu = spec.mu_prime;
      p.phi = spec.phi;
      p.fclass = spec.fclass;
    }
    p.eps = eps;
    p.realizable = true;
    return p;
  }
  if (family == "block-lift-example") {
    int H = cfg.value("H", 3);
    int multiplier = cfg.value("multiplier", 4);
    double pert = cfg.value("perturbation", 0.3);
    ope::ExampleInstance inst = ope::example_instance(H);
    ope::Mdp base = ope::example_mdp(H);
    ope::OfflineDistribution mu =
        ope::admissible_distribution(base.mtm, inst.pi_b);
    ope::BlockLift lift =
        ope::block_lift(base, inst.phi, mu, inst.pi_e, multiplier, rng);
    ope::OpeProblem p;
    p.mdp = lift.mdp;
    p.pi_e = lift.pi_e;
    p.mu = lift.mu;
    p.phi = lift.pools;
    ope::QFunction f0;
    f0.q = ope::lift_table(lift, base.mtm, ope::value(base, inst.pi_e).q);
    f0.w = ope::w_table(p.mdp.mtm, *p.mu, p.pi_e, f0.q);
    ope::QFunction f1 = f0;
    // Shift the first pool of the first layer so the two candidates disagree
    // at the initial distribution.
    for (int g : lift.pools.cells[0][0]) {
      int i = p.mdp.mtm.index_of(g);
      for (int a = 0; a < p.mdp.mtm.num_actions; ++a)
        f1.q[0][i * p.mdp.mtm.num_actions + a] += pert;
    }
    f1.w = ope::w_table(p.mdp.mtm, *p.mu, p.pi_e, f1.q);
    p.fclass = {f0, f1};
    p.eps = eps;
    p.realizable = true;
    return p;
  }
  if (family == "agnostic-admissible" || family == "agnostic-trajectory") {
    int kind = cfg.value("kind", 1);
    ope::AgnosticPair pair =
        family == "agnostic-admissible"
            ? ope::agnostic_admissible_instance(cfg.value("N", 2), rng)
            : ope::agnostic_trajectory_instance(cfg.value("H", 2), rng);
    ope::OpeProblem p = kind == 2 ? pair.p2 : pair.p1;
    p.eps = eps;
    return p;
  }
  throw ConfigError("unknown instance family: " + family);
}

ope::OpeProblem obtain_problem(const json& cfg, const Options& opt) {
  if (cfg.contains("problem"))
    return ope::parse_problem(read_file(cfg["problem"].get<std::string>()));
  return make_problem(cfg, opt);
}

void stamp(ope::Report& report, const std::string& raw_config,
           const Options& opt) {
  report.add("version", std::string(ope::kVersion));
  report.add("config_hash", ope::fnv1a(raw_config));
  report.add("seed", opt.seed);
}

void emit(const ope::Report& report, const std::string& out_path) {
  std::string text = report.to_text();
  std::cout << text;
  if (!out_path.empty()) write_file(out_path, text);
}

int cmd_build(const Options& opt) {
  std::string raw;
  json cfg = load_config(opt, &raw);
  ope::OpeProblem p = make_problem(cfg, opt);
  ope::validate(p.mdp);
  ope::validate_policy(p.mdp.mtm, p.pi_e);
  if (p.mu) ope::validate(p.mdp.mtm, *p.mu);
  std::string path = opt.out.empty() ? default_out("problem.txt") : opt.out;
  write_file(path, ope::serialize_problem(p));
  ope::Report report;
  stamp(report, raw, opt);
  report.add("problem_file", path);
  report.add("states", p.mdp.mtm.num_states());
  report.add("horizon", p.mdp.mtm.horizon);
  std::cout << report.to_text();
  return 0;
}

int cmd_concentrability(const Options& opt) {
  std::string raw;
  json cfg = load_config(opt, &raw);
  ope::OpeProblem p = obtain_problem(cfg, opt);
  if (!p.mu)
    throw ConfigError("concentrability needs an offline distribution");
  double eps = cfg.value("epsilon", opt.epsilon);

  ope::Report report;
  stamp(report, raw, opt);
  report.add("c_all_policy",
             ope::all_policy_concentrability(p.mdp.mtm, *p.mu));
  report.add("c_standard",
             ope::standard_concentrability(p.mdp.mtm, *p.mu, p.pi_e));
  ope::PushforwardConcentrability pf =
      ope::pushforward_concentrability(p.mdp.mtm, *p.mu);
  report.add("c_pf", pf.c_pf);
  report.add("c_x", pf.c_x);
  report.add("c_a", pf.c_a);
  if (p.phi) {
    ope::AggregatedModel agg =
        ope::aggregate(p.mdp.mtm, *p.mu, *p.phi, p.pi_e);
    ope::AggregatedConcentrability ac =
        ope::aggregated_concentrability(agg, eps);
    if (!ac.feasible)
      throw ope::InfeasibleError(
          "no cell subset reaches the requested occupancy");
    report.add("c_aggregated", ac.value);
    report.add("h_star", ac.h_star);
    std::string witness;
    for (int c : ac.witness) {
      if (!witness.empty()) witness += ' ';
      witness += std::to_string(c);
    }
    report.add("witness", witness);
    report.add("exact", ac.exact ? 1 : 0);
  }
  emit(report, opt.out.empty() ? default_out("concentrability.txt")
                               : opt.out);
  return 0;
}

double run_estimator(const std::string& estimator, const ope::OpeProblem& p,
                     long n, ope::Rng& rng) {
  if (estimator == "exact-oracle") return ope::value(p.mdp, p.pi_e).v_rho;
  if (estimator == "is") {
    if (!p.pi_b) throw ConfigError("importance sampling needs pi_b");
    ope::OfflineDataset data = ope::sample_trajectories(
        p.mdp, *p.pi_b, static_cast<int>(n), rng);
    return ope::is_estimate(data.trajectories, p.pi_e, *p.pi_b);
  }
  if (estimator == "bvft") {
    if (!p.mu) throw ConfigError("bvft needs an offline distribution");
    if (p.fclass.empty()) throw ConfigError("bvft needs a function class");
    ope::OfflineDataset data =
        ope::sample_general(p.mdp, *p.mu, static_cast<int>(n), rng);
    ope::ValueFunctionClass fc;
    for (const ope::QFunction& f : p.fclass)
      fc.members.push_back(ope::to_v_form(p.mdp.mtm, p.pi_e, f.q));
    return ope::bvft_select(p.mdp.mtm, data, fc, p.pi_e, rng, false)
        .estimate;
  }
  throw ConfigError("unknown estimator: " + estimator);
}

int cmd_evaluate(const Options& opt) {
  std::string raw;
  json cfg = load_config(opt, &raw);
  ope::OpeProblem p = obtain_problem(cfg, opt);
  std::string estimator = cfg.value("estimator", "bvft");
  ope::Rng rng(opt.seed, 0x657661);
  double exact = ope::value(p.mdp, p.pi_e).v_rho;
  double est = run_estimator(estimator, p, opt.samples, rng);
  ope::Report report;
  stamp(report, raw, opt);
  report.add("estimator", estimator);
  report.add("samples", static_cast<int>(opt.samples));
  report.add("estimate", est);
  report.add("exact", exact);
  report.add("abs_error", std::abs(est - exact));
  emit(report, opt.out.empty() ? default_out("evaluate.txt") : opt.out);
  return 0;
}

int cmd_reduce(const Options& opt) {
  std::string raw;
  json cfg = load_config(opt, &raw);
  ope::OpeProblem p = obtain_problem(cfg, opt);
  if (!p.pi_b) throw ConfigError("reduce needs a behavior policy");
  const int K = cfg.value("K", opt.replication);
  ope::Rng rng(opt.seed, 0x726564);

  ope::ReplicatedProblem rp =
      ope::replicate(p.mdp, p.pi_e, *p.pi_b, K, p.fclass);
  ope::OfflineDistribution mu_adm =
      ope::admissible_distribution(p.mdp.mtm, *p.pi_b);
  ope::OfflineDataset data = ope::sample_general(
      p.mdp, mu_adm, static_cast<int>(opt.samples) * K, rng);
  double est = ope::reduce_and_evaluate(
      rp, data.tuples,
      [&](const std::vector<ope::Trajectory>& trs,
          const std::vector<ope::QFunction>&) {
        return ope::is_estimate(trs, rp.pi_e, rp.pi_b);
      },
      rng);
  double exact = ope::value(p.mdp, p.pi_e).v_rho;
  ope::Report report;
  stamp(report, raw, opt);
  report.add("replication", K);
  report.add("lifted_horizon", rp.mdp.mtm.horizon);
  report.add("trajectories", static_cast<int>(opt.samples));
  report.add("estimate", est);
  report.add("exact", exact);
  report.add("abs_error", std::abs(est - exact));
  emit(report, opt.out.empty() ? default_out("reduce.txt") : opt.out);
  return 0;
}

int cmd_sweep(const Options& opt) {
  std::string raw;
  json cfg = load_config(opt, &raw);
  ope::OpeProblem p = obtain_problem(cfg, opt);
  std::string estimator = cfg.value("estimator", "bvft");
  std::vector<long> grid = cfg.value("grid", std::vector<long>{100, 100000});
  int trials = cfg.value("trials", 50);
  if (trials < 1) throw ConfigError("trials must be >= 1");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (grid[i] >= grid[i + 1])
      throw ConfigError("sample grid must be strictly increasing");

  double exact = ope::value(p.mdp, p.pi_e).v_rho;
  const int cells = static_cast<int>(grid.size()) * trials;
  std::vector<double> errors(cells, 0.0);
  ope::Rng master(opt.seed, 0x737770);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int idx = 0; idx < cells; ++idx) {
    int gi = idx / trials;
    int trial = idx % trials;
    ope::Rng rng = master.derive(
        static_cast<std::uint64_t>(gi) * 1000003ull + trial);
    double est = run_estimator(estimator, p, grid[gi], rng);
    errors[idx] = std::abs(est - exact);
  }

  std::ostringstream csv;
  csv << "# version " << ope::kVersion << "\n";
  csv << "# config_hash " << ope::fnv1a(raw) << "\n";
  csv << "# seed " << opt.seed << "\n";
  csv << "n,trial,abs_error\n";
  for (std::size_t gi = 0; gi < grid.size(); ++gi)
    for (int t = 0; t < trials; ++t)
      csv << grid[gi] << ',' << t << ','
          << ope::format_double(errors[gi * trials + t]) << "\n";
  csv << "n,mean_abs_error,std_abs_error\n";
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    double mean = 0.0, var = 0.0;
    for (int t = 0; t < trials; ++t) mean += errors[gi * trials + t];
    mean /= trials;
    for (int t = 0; t < trials; ++t) {
      double d = errors[gi * trials + t] - mean;
      var += d * d;
    }
    var = trials > 1 ? var / (trials - 1) : 0.0;
    csv << grid[gi] << ',' << ope::format_double(mean) << ','
        << ope::format_double(std::sqrt(var)) << "\n";
  }
  std::string path = opt.out.empty() ? default_out("sweep.csv") : opt.out;
  write_file(path, csv.str());
  std::cout << "sweep_file\t" << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offline policy evaluation harness"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON configuration file");
    sub->add_option("--seed", opt.seed, "master seed");
    sub->add_option("--out", opt.out, "output path");
    sub->add_option("--epsilon", opt.epsilon, "accuracy parameter");
    sub->add_option("--samples", opt.samples, "sample count");
    sub->add_option("--replication", opt.replication, "replication count K");
    return sub;
  };
  CLI::App* build = add_common(app.add_subcommand("build"));
  CLI::App* conc = add_common(app.add_subcommand("concentrability"));
  CLI::App* eval = add_common(app.add_subcommand("evaluate"));
  CLI::App* reduce = add_common(app.add_subcommand("reduce"));
  CLI::App* sweep = add_common(app.add_subcommand("sweep"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (build->parsed()) return cmd_build(opt);
    if (conc->parsed()) return cmd_concentrability(opt);
    if (eval->parsed()) return cmd_evaluate(opt);
    if (reduce->parsed()) return cmd_reduce(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ope::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 4;
  } catch (const ope::InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
