#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace sqan {

// Counter-based random numbers (Philox4x32-10). Every Gaussian draw is a pure
// function of (substream seed, step index, lane), so trajectories can be
// dispatched to any number of workers in any order and still reproduce
// bit-identically.
//
// Lane assignment: 0 = dW_I, 1 = dW_Q, 2 = classical I noise, 3 = classical Q.

namespace rng {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Per-trajectory substream seed, derived from (master seed, trajectory index).
inline std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t traj_index) {
  return splitmix64(master_seed ^ splitmix64(traj_index + 0x1234u));
}

inline double uniform_from_bits(std::uint64_t bits) {
  // strictly inside (0,1); safe as a Box-Muller log argument
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// One standard normal for the given (substream, step, lane) coordinate.
inline double normal(std::uint64_t substream, std::uint64_t step, std::uint32_t lane) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), lane, 0x5ABE1u};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(substream),
                                            static_cast<std::uint32_t>(substream >> 32)};
  const auto r = philox4x32(ctr, key);
  const std::uint64_t b0 = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
  const std::uint64_t b1 = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
  const double u1 = uniform_from_bits(b0);
  const double u2 = uniform_from_bits(b1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace rng

}  // namespace sqan
