#include "ope/serialize.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace ope {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

class Writer {
 public:
  void word(const std::string& w) {
    if (!out_.empty() && out_.back() != '\n') out_ += ' ';
    out_ += w;
  }
  void num(double v) { word(format_double(v)); }
  void num(int v) { word(std::to_string(v)); }
  void line() { out_ += '\n'; }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Tokens {
 public:
  explicit Tokens(const std::string& text) : in_(text) {}
  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw InvariantError("problem text truncated");
    return w;
  }
  void expect(const std::string& w) {
    std::string got = word();
    if (got != w)
      throw InvariantError("problem text: expected '" + w + "', got '" +
                           got + "'");
  }
  double num() {
    std::string w = word();
    char* end = nullptr;
    double v = std::strtod(w.c_str(), &end);
    if (end == w.c_str() || *end != '\0')
      throw InvariantError("problem text: bad number '" + w + "'");
    return v;
  }
  int integer() {
    double v = num();
    return static_cast<int>(v);
  }

 private:
  std::istringstream in_;
};

void write_reward(Writer& w, const RewardDist& r) {
  w.num(static_cast<int>(r.support.size()));
  for (double v : r.support) w.num(v);
  for (double v : r.prob) w.num(v);
}

RewardDist read_reward(Tokens& t) {
  RewardDist r;
  int k = t.integer();
  r.support.resize(k);
  r.prob.resize(k);
  for (double& v : r.support) v = t.num();
  for (double& v : r.prob) v = t.num();
  return r;
}

void write_policy(Writer& w, const Policy& pi) {
  for (const auto& row : pi.dist)
    for (double v : row) w.num(v);
  w.line();
}

Policy read_policy(Tokens& t, int num_states, int num_actions) {
  Policy pi;
  pi.num_actions = num_actions;
  pi.dist.assign(num_states, std::vector<double>(num_actions, 0.0));
  for (auto& row : pi.dist)
    for (double& v : row) v = t.num();
  return pi;
}

}  // namespace

std::string serialize_problem(const OpeProblem& p) {
  const Mtm& m = p.mdp.mtm;
  const int A = m.num_actions;
  Writer w;
  w.word("ope_problem");
  w.word("v1");
  w.line();
  w.word("horizon");
  w.num(m.horizon);
  w.word("actions");
  w.num(A);
  w.line();
  w.word("layers");
  for (int n : m.layer_size) w.num(n);
  w.line();
  w.word("initial");
  for (double v : m.initial) w.num(v);
  w.line();
  w.word("transitions");
  w.line();
  for (const auto& layer : m.transition) {
    for (double v : layer) w.num(v);
    w.line();
  }
  w.word("rewards");
  w.line();
  for (const auto& layer : p.mdp.reward) {
    for (const RewardDist& r : layer) write_reward(w, r);
    w.line();
  }
  w.word("pi_e");
  w.line();
  write_policy(w, p.pi_e);
  w.word("pi_b");
  w.num(p.pi_b ? 1 : 0);
  w.line();
  if (p.pi_b) write_policy(w, *p.pi_b);
  w.word("mu");
  w.num(p.mu ? 1 : 0);
  w.line();
  if (p.mu) {
    w.num(p.mu->provenance == Provenance::Admissible ? 1 : 0);
    w.line();
    for (const auto& layer : p.mu->mu) {
      for (double v : layer) w.num(v);
      w.line();
    }
  }
  w.word("phi");
  w.num(p.phi ? 1 : 0);
  w.line();
  if (p.phi) {
    for (const auto& layer : p.phi->cells) {
      w.num(static_cast<int>(layer.size()));
      for (const auto& cell : layer) {
        w.num(static_cast<int>(cell.size()));
        for (int g : cell) w.num(g);
      }
      w.line();
    }
  }
  w.word("fclass");
  w.num(static_cast<int>(p.fclass.size()));
  w.line();
  for (const QFunction& f : p.fclass) {
    for (const auto& layer : f.q)
      for (double v : layer) w.num(v);
    w.line();
    w.num(static_cast<int>(f.w.size()));
    for (double v : f.w) w.num(v);
    w.line();
  }
  w.word("eps");
  w.num(p.eps);
  w.word("realizable");
  w.num(p.realizable ? 1 : 0);
  w.line();
  w.word("end");
  w.line();
  return w.take();
}

OpeProblem parse_problem(const std::string& text) {
  Tokens t(text);
  t.expect("ope_problem");
  t.expect("v1");
  OpeProblem p;
  t.expect("horizon");
  int H = t.integer();
  t.expect("actions");
  int A = t.integer();
  t.expect("layers");
  std::vector<int> sizes(H);
  for (int& n : sizes) n = t.integer();
  Mtm& m = p.mdp.mtm;
  m.init_layout(H, A, sizes);
  t.expect("initial");
  for (double& v : m.initial) v = t.num();
  t.expect("transitions");
  for (auto& layer : m.transition)
    for (double& v : layer) v = t.num();
  t.expect("rewards");
  p.mdp.reward.assign(H, {});
  for (int h = 0; h < H; ++h) {
    p.mdp.reward[h].resize(static_cast<std::size_t>(sizes[h]) * A);
    for (RewardDist& r : p.mdp.reward[h]) r = read_reward(t);
  }
  t.expect("pi_e");
  p.pi_e = read_policy(t, m.num_states(), A);
  t.expect("pi_b");
  if (t.integer()) p.pi_b = read_policy(t, m.num_states(), A);
  t.expect("mu");
  if (t.integer()) {
    OfflineDistribution mu;
    mu.horizon = H;
    mu.num_actions = A;
    mu.provenance =
        t.integer() ? Provenance::Admissible : Provenance::Explicit;
    mu.mu.assign(H - 1, {});
    for (int h = 0; h + 1 < H; ++h) {
      mu.mu[h].assign(static_cast<std::size_t>(sizes[h]) * A, 0.0);
      for (double& v : mu.mu[h]) v = t.num();
    }
    p.mu = std::move(mu);
  }
  t.expect("phi");
  if (t.integer()) {
    AggregationScheme phi;
    phi.cells.assign(H, {});
    for (int h = 0; h < H; ++h) {
      int nc = t.integer();
      phi.cells[h].assign(nc, {});
      for (auto& cell : phi.cells[h]) {
        cell.resize(t.integer());
        for (int& g : cell) g = t.integer();
      }
    }
    phi.finalize(m);
    p.phi = std::move(phi);
  }
  t.expect("fclass");
  int nf = t.integer();
  p.fclass.resize(nf);
  for (QFunction& f : p.fclass) {
    f.q.assign(H, {});
    for (int h = 0; h < H; ++h) {
      f.q[h].assign(static_cast<std::size_t>(sizes[h]) * A, 0.0);
      for (double& v : f.q[h]) v = t.num();
    }
    f.w.resize(t.integer());
    for (double& v : f.w) v = t.num();
  }
  t.expect("eps");
  p.eps = t.num();
  t.expect("realizable");
  p.realizable = t.integer() != 0;
  t.expect("end");
  return p;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void Report::add(const std::string& key, const std::string& value) {
  entries.emplace_back(key, value);
}
void Report::add(const std::string& key, double value) {
  entries.emplace_back(key, format_double(value));
}
void Report::add(const std::string& key, std::uint64_t value) {
  entries.emplace_back(key, std::to_string(value));
}
void Report::add(const std::string& key, int value) {
  entries.emplace_back(key, std::to_string(value));
}

std::string Report::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries) {
    out += k;
    out += '\t';
    out += v;
    out += '\n';
  }
  return out;
}

}  // namespace ope
