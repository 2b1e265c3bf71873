#ifndef GBRIDGE_RNG_HPP
#define GBRIDGE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace gbridge {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Splittable random stream: stream(seed, purpose, index) gives mutually
// independent streams for the same seed.  All samplers are hand-rolled so a
// (seed, purpose, index) triple yields the same draws on every platform.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0) {
    std::uint64_t s = seed ^ detail::fnv1a(purpose) ^ (index * 0xd1342543de82ef95ULL);
    for (auto& w : state_) w = detail::splitmix64(s);
  }

  // xoshiro256**
  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on (0,1)
  double uniform() {
    double u;
    do {
      u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    } while (u <= 0.0);
    return u;
  }

  double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

  // Marsaglia polar method
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_normal_;
    }
    double v1, v2, s;
    do {
      v1 = 2.0 * uniform() - 1.0;
      v2 = 2.0 * uniform() - 1.0;
      s = v1 * v1 + v2 * v2;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_normal_ = v2 * f;
    have_cached_ = true;
    return v1 * f;
  }

  // Marsaglia-Tsang; shape < 1 handled by the boost X = X_{a+1} U^{1/a}.
  double gamma(double shape, double rate = 1.0) {
    if (!(shape > 0.0) || !(rate > 0.0))
      throw std::domain_error("Rng::gamma: shape and rate must be positive");
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
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
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  // Exact: inversion by multiplication in chunks of mean <= 30.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw std::domain_error("Rng::poisson: mean must be >= 0");
    std::uint64_t total = 0;
    while (mean > 30.0) {
      total += poisson_small(30.0);
      mean -= 30.0;
    }
    return total + poisson_small(mean);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t poisson_small(double mean) {
    const double limit = std::exp(-mean);
    double prod = uniform();
    std::uint64_t n = 0;
    while (prod > limit) {
      ++n;
      prod *= uniform();
    }
    return n;
  }

  std::uint64_t state_[4];
  double cached_normal_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace gbridge

#endif  // GBRIDGE_RNG_HPP
