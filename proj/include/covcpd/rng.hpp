#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace covcpd {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator, so it
// plugs into the standard and Boost distributions. The state is filled from
// a splitmix64 sequence started at the seed.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed = 0) noexcept { this->seed(seed); }

  void seed(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      word = splitmix64(x);
      x += 0x9e3779b97f4a7c15ULL;
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  bool operator==(const Xoshiro256pp&) const = default;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
};

// Engine used for every stochastic component. Each replicate owns an engine
// seeded from derive_seed(base, {replicate, ...}), so results never depend on
// how replicates are scheduled across threads.
using Engine = Xoshiro256pp;

// Mixes a base seed with a list of stream coordinates.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords) noexcept;

inline Engine make_engine(std::uint64_t base, std::initializer_list<std::uint64_t> coords) {
  return Engine(derive_seed(base, coords));
}

}  // namespace covcpd
