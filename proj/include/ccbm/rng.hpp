#pragma once

#include <cstdint>

namespace ccbm {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen over std::mt19937 because the
// standard distributions are not bit-reproducible across library
// implementations, and the experiment tables must be.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Uniform draw in [0, 1) from the top 53 bits of one SplitMix64 output.
inline double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

/// One uniform [0,1) draw from the stream keyed by (seed, node, component).
/// Each mesh node gets its own stream so that the draw attached to a node
/// does not depend on how many other nodes exist or in what order they are
/// visited.
inline double node_draw(std::uint64_t seed, std::uint64_t node, std::uint64_t component) {
  std::uint64_t key = seed;
  // fold the stream id through one mixing round before drawing
  std::uint64_t id = 2 * node + component + 1;
  std::uint64_t state = splitmix64(key) ^ (id * 0x9E3779B97F4A7C15ull);
  return uniform01(state);
}

}  // namespace ccbm
