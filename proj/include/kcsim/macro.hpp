/**
 * @file  macro.hpp
 * @brief Finite-volume solver for the chemotaxis-reaction-diffusion limit
 *
 *   d_t c + d_x (c chi d_x s - Dc d_x c) = -d1 c - beta c u + r
 *   d_t s - d_x (Ds d_x s)               = -d2 s + beta c u
 *   d_t u - d_x (Du d_x u)               = -d3 u + k s
 *
 * on a periodic 1D grid. Diffusion uses centered second differences, the
 * chemotactic flux upwinds c by the sign of chi d_x s at each face.
 */
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "kcsim/model.hpp"
#include "kcsim/space.hpp"
#include "kcsim/velocity.hpp"

namespace kcsim {

struct MacroCoefficients {
    double Dc = 0.0;
    double Ds = 0.0;
    double Du = 0.0;
    double chi = 0.0;
    ModelParams reactions;
    std::optional<std::vector<double>> r_field;  // per-cell production, overrides reactions.r

    void validate(const SpatialGrid& grid) const;
    [[nodiscard]] double production(std::size_t cell) const {
        return r_field ? (*r_field)[cell] : reactions.r;
    }
};

/// Dc, Ds, Du and chi by velocity quadrature (1D reduction of the tensors).
MacroCoefficients build_macro_coefficients(const ModelParams& params, const VelocityGrid& vgrid);

enum class MacroTimeScheme { ForwardEuler, RungeKutta4 };

/// Semi-discrete right-hand side; the result holds time derivatives.
MacroState macro_rhs(const MacroState& state, const MacroCoefficients& coeff, const SpatialGrid& grid);

/// Largest |chi d_x s| over cell faces.
double max_chemotactic_speed(const MacroState& state, const MacroCoefficients& coeff,
                             const SpatialGrid& grid);

/**
 * cfl / max_i rate_i, where rate_i bounds the loss rate of species i in one
 * explicit step (diffusion 2 D_i / dx^2, both-face chemotactic outflow
 * 2 max|chi d_x s| / dx for c, and linear decay). Forward Euler steps within
 * this limit keep nonnegative data nonnegative. Infinity when all rates vanish.
 */
double macro_step_limit(const MacroState& state, const MacroCoefficients& coeff,
                        const SpatialGrid& grid, double cfl = 0.9);

/// Step used by run_macro: macro_step_limit at the default cfl.
double macro_auto_dt(const MacroState& state, const MacroCoefficients& coeff, const SpatialGrid& grid);

/**
 * Advances the state by dt. Throws StepSizeError if dt exceeds
 * macro_step_limit and NegativityError for densities below -1e-12.
 */
MacroState macro_step(const MacroState& state, const MacroCoefficients& coeff,
                      const SpatialGrid& grid, double dt,
                      MacroTimeScheme scheme = MacroTimeScheme::ForwardEuler);

struct MacroRunOptions {
    MacroTimeScheme scheme = MacroTimeScheme::RungeKutta4;
    double max_dt = 0.0;  // 0 selects macro_auto_dt every step
    std::function<void(const MacroState&)> on_snapshot;
};

struct MacroRun {
    std::vector<MacroState> snapshots;
    MacroState final_state;
    std::size_t steps = 0;
};

/**
 * Integrates to t_final, landing exactly on every requested snapshot time.
 * Snapshots always include t = 0 and t_final.
 */
MacroRun run_macro(const MacroState& initial, const MacroCoefficients& coeff,
                   const SpatialGrid& grid, double t_final,
                   const std::vector<double>& snapshot_times = {},
                   const MacroRunOptions& options = {});

/// Sorted, de-duplicated snapshot schedule in (0, t_final], always ending at t_final.
std::vector<double> snapshot_schedule(double t_final, const std::vector<double>& requested);

}  // namespace kcsim
