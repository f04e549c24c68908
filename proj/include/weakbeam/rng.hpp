#pragma once

#include <bit>
#include <cstdint>
#include <random>

namespace weakbeam {

// splitmix64; used only to derive well-separated seeds for the per-block
// mt19937_64 streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  std::uint64_t s = h ^ (v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2));
  return splitmix64(s);
}

inline std::uint64_t hash_combine(std::uint64_t h, double v) {
  return hash_combine(h, std::bit_cast<std::uint64_t>(v));
}

// Deterministic stream for one shot block: derived from the run seed, a
// configuration salt, and the block index, so blocks can be generated
// independently (and in parallel) yet merge into a reproducible stream.
inline std::mt19937_64 make_block_rng(std::uint64_t seed, std::uint64_t config_salt,
                                      std::uint64_t block_index) {
  std::uint64_t s = seed;
  s = hash_combine(s, config_salt);
  s = hash_combine(s, block_index);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(block_index),
                    static_cast<std::uint32_t>(config_salt)};
  return std::mt19937_64(seq);
}

inline double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace weakbeam
