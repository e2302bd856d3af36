#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace phgm {

// Counter-based generator. A stream is identified by a 64-bit key derived
// from the run seed and a path of integers (purpose, group, subject, ...);
// the i-th output of a stream is splitmix64(key + i * golden). Streams are
// therefore independent of thread scheduling and of how many values other
// streams consumed.
//
// Distributions are implemented here rather than taken from <random>, whose
// algorithms are implementation-defined; draws must be identical across
// standard libraries for seeded reproducibility.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  // Child stream; does not advance this one.
  Rng split(std::uint64_t id) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return mix(key_ + (counter_++) * kGolden); }

  double uniform();                 // [0, 1), 53 random bits
  double uniform_open();            // (0, 1)
  double normal();                  // N(0, 1), Box-Muller
  double exponential(double rate);  // Exp(rate), mean 1/rate
  std::uint64_t below(std::uint64_t bound);  // uniform on [0, bound)
  int sign() { return ((*this)() >> 63) ? 1 : -1; }

  static std::uint64_t mix(std::uint64_t z);

private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace phgm
