/**
 * @file  space.hpp
 * @brief Periodic 1D cell grid and the macroscopic state living on it.
 */
#pragma once

#include <cstddef>
#include <vector>

namespace kcsim {

struct SpatialGrid {
    double length = 1.0;
    std::size_t n_cells = 128;

    [[nodiscard]] double dx() const { return length / static_cast<double>(n_cells); }
    [[nodiscard]] double center(std::size_t k) const { return (static_cast<double>(k) + 0.5) * dx(); }
    [[nodiscard]] std::size_t left(std::size_t k) const { return k == 0 ? n_cells - 1 : k - 1; }
    [[nodiscard]] std::size_t right(std::size_t k) const { return k + 1 == n_cells ? 0 : k + 1; }

    void validate() const;
};

/// Densities c, s, u per cell at a given time.
struct MacroState {
    std::vector<double> c;
    std::vector<double> s;
    std::vector<double> u;
    double time = 0.0;

    static MacroState constant(std::size_t n_cells, double c, double s, double u);
    [[nodiscard]] std::size_t size() const { return c.size(); }
    /// Throws NegativityError if any density is below -tol; clamps [-tol, 0) to 0.
    void enforce_nonnegative(double tol = 1e-12);
};

/// sum_k dx * values[k]
double total_mass(const std::vector<double>& values, const SpatialGrid& grid);

/**
 * Averages a fine-grid field onto a grid coarser by an integer factor.
 * Cells are nested: coarse cell k covers fine cells [k*factor, (k+1)*factor).
 */
std::vector<double> restrict_average(const std::vector<double>& fine, std::size_t factor);
MacroState restrict_average(const MacroState& fine, std::size_t factor);

}  // namespace kcsim
