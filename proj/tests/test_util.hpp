#pragma once

#include "certiloc/synthgen.hpp"

namespace testutil {

// Small zero-noise instance for unit tests.
inline certiloc::Generated instance(int robots, std::uint64_t seed, double sigma = 0.0,
                                    int timesteps = 8, double density = 0.6) {
  certiloc::GenConfig cfg;
  cfg.robots = robots;
  cfg.timesteps = timesteps;
  cfg.sigma_bearing = sigma;
  cfg.edge_density = density;
  cfg.seed = seed;
  return certiloc::generate(cfg);
}

// Two robots, one edge A->B, hand-checkable sizes.
inline certiloc::Generated tiny(std::uint64_t seed = 7, double sigma = 0.0) {
  return instance(2, seed, sigma, 4, 1.0);
}

}  // namespace testutil
