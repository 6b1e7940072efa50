#ifndef SEEDSTABLE_RNG_HPP
#define SEEDSTABLE_RNG_HPP

#include <cstdint>
#include <cmath>
#include <stdexcept>

namespace seedstable {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Stateless, bijective on u64.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-indexed seed stream: the counter-th output of a SplitMix64
// sequence started at master_seed. Stateless and order-independent.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed,
                                    std::uint64_t counter) noexcept {
  return mix64(master_seed + (counter + 1) * 0x9e3779b97f4a7c15ULL);
}

// Deterministic 64-bit generator. All distributions below are implemented
// in-house so streams are identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform on [0, 1) with 53 bits of precision.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  // Unbiased integer in [0, n) via rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller; draws consumed in a fixed order.
  double normal() noexcept {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  // Marsaglia-Tsang for shape >= 1, boosted below 1. Rate fixed at 1.
  double gamma(double shape) {
    if (!(shape > 0)) throw std::invalid_argument("Rng::gamma: shape must be > 0");
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double gamma(double shape, double rate) { return gamma(shape) / rate; }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }

  double student_t(double df) {
    const double z = normal();
    const double w = chi_squared(df);
    return z / std::sqrt(w / df);
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace seedstable

#endif
