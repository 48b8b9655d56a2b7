#pragma once

#include <cstdint>
#include <random>

namespace qndepp {

using Rng = std::mt19937_64;

/// Seed for stream `stream` of a run seeded with `master`.
///
/// Splitting rule: splitmix64(master + (stream + 1) * 0x9E3779B97F4A7C15).
/// Streams derived this way are used for Monte Carlo shards and sweep
/// points, so shard results do not depend on thread scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

inline Rng make_stream(std::uint64_t master, std::uint64_t stream) {
  return Rng(derive_seed(master, stream));
}

}  // namespace qndepp
