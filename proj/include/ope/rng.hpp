#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ope {

// Counter-based pseudorandom generator (splitmix64-style output function).
// A draw is a pure function of (key, counter), so streams can be split with
// derive() and every sampling routine is byte-reproducible across platforms.
// We deliberately avoid std::uniform_*_distribution, whose output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed) ^ mix(stream ^ 0x9e3779b97f4a7c15ull))) {}

  std::uint64_t next_u64() {
    return mix(key_ + 0x9e3779b97f4a7c15ull * ++counter_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool next_bool() { return (next_u64() >> 63) != 0; }

  // Uniform integer in [0, n).
  int next_below(int n) {
    int k = static_cast<int>(next_double() * n);
    return k < n ? k : n - 1;
  }

  // Inverse-CDF draw from an unnormalized nonnegative weight vector.
  int categorical(const double* w, int n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += w[i];
    if (!(total > 0.0)) throw std::runtime_error("categorical: zero mass");
    double u = next_double() * total;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += w[i];
      if (u < acc) return i;
    }
    return n - 1;  // guard against accumulated rounding
  }

  int categorical(const std::vector<double>& w) {
    return categorical(w.data(), static_cast<int>(w.size()));
  }

  // Independent stream for a subtask; unaffected by draws from *this.
  Rng derive(std::uint64_t task) const {
    Rng r(0);
    r.key_ = mix(key_ ^ mix(task + 0xd1b54a32d192ed03ull));
    r.counter_ = 0;
    return r;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ope
