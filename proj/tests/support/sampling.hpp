// Seeded parameter samplers shared by unit and acceptance tests.
#pragma once

#include <cstdint>
#include <random>

#include "kcsim/model.hpp"

namespace kcsim::sampling {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Reaction rates in [0.2, 2], r in [0.1, 3], everything else at defaults.
inline ModelParams random_reactions(std::mt19937_64& rng) {
    ModelParams p;
    p.d1 = uniform(rng, 0.2, 2.0);
    p.d2 = uniform(rng, 0.2, 2.0);
    p.d3 = uniform(rng, 0.2, 2.0);
    p.beta = uniform(rng, 0.2, 2.0);
    p.k = uniform(rng, 0.2, 2.0);
    p.r = uniform(rng, 0.1, 3.0);
    return p;
}

/// Random rates with r chosen so that R0 equals the requested value.
inline ModelParams reactions_with_r0(std::mt19937_64& rng, double r0) {
    ModelParams p = random_reactions(rng);
    p.r = r0 * p.d1 * p.d2 * p.d3 / (p.beta * p.k);
    return p;
}

inline SirState random_positive_state(std::mt19937_64& rng, double lo = 0.1, double hi = 3.0) {
    return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

}  // namespace kcsim::sampling
