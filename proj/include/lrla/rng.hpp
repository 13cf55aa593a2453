#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace lrla {

namespace detail {

// splitmix64 finalizer; used for seeding and stream derivation
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Deterministic xoshiro256++ stream with hash-based substream derivation.
// Derived streams depend only on (root seed, salt), never on how much of the
// parent stream has been consumed, so adding a consumer cannot perturb the
// draws seen by any other.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : root_(seed) {
    std::uint64_t z = seed;
    for (auto& word : state_) word = detail::mix64(z = detail::mix64(z));
  }

  RandomStream derive(std::uint64_t salt) const {
    return RandomStream(detail::mix64(root_ ^ detail::mix64(salt ^ 0x5851f42d4c957f2dull)));
  }

  RandomStream derive(std::string_view label) const {
    return derive(detail::fnv1a64(label));
  }

  RandomStream derive(std::string_view label, std::uint64_t index) const {
    return derive(detail::fnv1a64(label) ^ detail::mix64(index));
  }

  std::uint64_t root_seed() const { return root_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1]
  double uniform_pos() { return 1.0 - uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // Box-Muller; spare cached for the next call
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // half-Cauchy C+(0, gamma) via inverse CDF
  double half_cauchy(double gamma) {
    return gamma * std::tan(0.5 * M_PI * uniform());
  }

  // uniform integer in [0, bound)
  int uniform_int(int bound) {
    return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                             static_cast<unsigned __int128>(bound)) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t state_[4];
  std::uint64_t root_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lrla
