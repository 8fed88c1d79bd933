#pragma once

#include <cstdint>
#include <random>

namespace eigsense {

/// Independent random streams used inside one Monte Carlo trial.
enum class Stream : std::uint64_t {
  noise = 1,
  source = 2,
  channel = 3,
  uncertainty = 4,
  segment = 5,
  control = 6,
  null_noise = 7,
};

/// One SplitMix64 step (Steele, Lea & Flood); advances `state`.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/**
 * Seed for the stream (master, trial, stream).
 *
 * The three keys are absorbed one at a time through SplitMix64, so every
 * trial gets its own stream independent of which worker runs it. Engines
 * are std::mt19937_64 seeded with the derived value; together with
 * libstdc++'s distributions this makes runs bit-reproducible on a given
 * toolchain.
 */
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, Stream stream) {
  std::uint64_t state = master;
  std::uint64_t h = splitmix64(state);
  state = h ^ trial;
  h = splitmix64(state);
  state = h ^ static_cast<std::uint64_t>(stream);
  return splitmix64(state);
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t master, std::uint64_t trial, Stream stream) {
  return Engine(derive_seed(master, trial, stream));
}

}  // namespace eigsense
