#pragma once

#include <cstdint>
#include <initializer_list>

namespace helix {

// Self-contained generator so stub runs replay bit-identically on any
// platform. The standard <random> distributions have implementation-defined
// sequences, which would tie run logs to a particular libstdc++.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller; the spare value is cached.
  double gaussian();
  double gaussian(double mean, double stddev);

  struct State {
    std::uint64_t s[4];
    bool has_spare;
    double spare;
  };
  State state() const;
  void restore(const State& st);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 finalizer; also the basis for seed derivation.
std::uint64_t mix64(std::uint64_t x);

// Folds a tag sequence into a master seed so every (iteration, batch,
// rollout) site gets an independent stream regardless of scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

}  // namespace helix
