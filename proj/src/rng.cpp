#include "phgm/rng.hpp"

#include <cmath>
#include <numbers>

namespace phgm {

std::uint64_t Rng::mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) : Rng(seed) {
  for (auto id : path) key_ = mix(key_ ^ mix(id + 0x3c6ef372fe94f82bULL));
}

Rng Rng::split(std::uint64_t id) const {
  Rng child(0);
  child.key_ = mix(key_ ^ mix(id + 0x3c6ef372fe94f82bULL));
  return child;
}

double Rng::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  double u;
  do {
    u = uniform();
  } while (u == 0.0);
  return u;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::exponential(double rate) {
  return -std::log(uniform_open()) / rate;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Lemire's rejection keeps the result exactly uniform.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = (*this)();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace phgm
