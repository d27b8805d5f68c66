/**
 * @file  profile.hpp
 * @brief Initial macroscopic profiles that can be sampled on any grid.
 */
#pragma once

#include <string>
#include <vector>

#include "kcsim/model.hpp"
#include "kcsim/space.hpp"

namespace kcsim {

struct InitialProfile {
    enum class Kind { Constant, Cosine, Cells };

    Kind kind = Kind::Constant;
    /// Base densities; u, v, w hold c, s, u respectively.
    SirState base{1.0, 1.0, 1.0};
    // Cosine: rho_i(x) = base_i (1 + amplitude cos(2 pi mode x / L))
    double amplitude = 0.0;
    int mode = 1;
    // Cells: explicit per-cell densities, piecewise constant in x.
    std::vector<SirState> cells;

    /**
     * Point values at cell centers for Constant and Cosine. Cells profiles are
     * prolonged piecewise-constantly onto grids that refine the stored one
     * by an integer factor.
     */
    [[nodiscard]] MacroState sample(const SpatialGrid& grid) const;
    [[nodiscard]] bool is_homogeneous() const;
    [[nodiscard]] std::string describe() const;
};

}  // namespace kcsim
