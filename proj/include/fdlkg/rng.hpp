#pragma once

#include <cstdint>
#include <random>

namespace fdlkg {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// One reproducible stream per (master_seed, stream_id): splitmix64 whitens the
// pair into a seed sequence, so parallel trajectories never share state and the
// draw sequence is independent of how work is scheduled.
struct RngStream {
  std::mt19937_64 engine;
  std::uint64_t master_seed = 0, stream_id = 0;

  RngStream(std::uint64_t master, std::uint64_t stream) : master_seed(master), stream_id(stream) {
    std::uint64_t x = master ^ (0x9E3779B97F4A7C15ULL * (stream + 0x243F6A8885A308D3ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(x)), static_cast<std::uint32_t>(x >> 32),
                      static_cast<std::uint32_t>(splitmix64(x)), static_cast<std::uint32_t>(x >> 32),
                      static_cast<std::uint32_t>(splitmix64(x)), static_cast<std::uint32_t>(x >> 32),
                      static_cast<std::uint32_t>(splitmix64(x)), static_cast<std::uint32_t>(x >> 32)};
    engine.seed(seq);
  }

  // per-stream distribution: Box-Muller caches one value, which must not leak
  // across streams
  std::normal_distribution<double> normal_dist{};

  double normal() { return normal_dist(engine); }

  double uniform() {
    return std::uniform_real_distribution<double>{0.0, 1.0}(engine);
  }

  std::uint64_t bits() { return engine(); }
};

}  // namespace fdlkg
