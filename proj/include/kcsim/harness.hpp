/**
 * @file  harness.hpp
 * @brief Epsilon sweeps comparing kinetic moments with their macroscopic limit.
 *
 * Two regimes are implemented:
 *
 *  - Diffusive, q1 = q2 = q3 = p = 1: the reference is the chemotaxis-reaction-
 *    diffusion system solved by run_macro on a refined grid and averaged back
 *    onto the kinetic grid.
 *  - ODE limit, q1 = q2 = q3 = p = 2: transport and chemotaxis drop out of the
 *    limit, so every cell follows the SIR system; the reference is
 *    integrate_sir per cell.
 *
 * The error for species i at a given epsilon is the discrete L2 norm over
 * space and the snapshot times t > 0:
 *
 *   e_i = sqrt( (1/N_t) sum_t sum_k dx (m_i(t, x_k) - ref_i(t, x_k))^2 )
 */
#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "kcsim/kinetic.hpp"
#include "kcsim/macro.hpp"
#include "kcsim/model.hpp"
#include "kcsim/profile.hpp"

namespace kcsim {

enum class Regime { Diffusive, OdeLimit };

/// Throws RegimeError unless (q1, q2, q3, p) is (1,1,1,1) or (2,2,2,2).
Regime classify_regime(const ModelParams& params);

struct ConvergenceStudy {
    ModelParams params;
    SpatialGrid grid{1.0, 128};
    std::size_t n_velocity = 16;
    InitialProfile initial;
    double t_final = 0.2;
    std::vector<double> snapshot_times;  // empty: four equally spaced times ending at t_final
    std::vector<double> eps_list;
    TransportScheme transport = TransportScheme::Spectral;
    double cfl = KineticSolver::kMaxCfl;
    std::size_t reference_refinement = 4;  // macro reference grid = n_cells * refinement
    double ode_reference_dt = 1e-4;
    unsigned threads = 0;                  // 0: KCSIM_THREADS or hardware concurrency
};

struct ConvergenceReport {
    std::array<int, 4> regime{};  // q1, q2, q3, p
    std::vector<double> eps_values;
    std::vector<std::array<double, 3>> errors;  // per epsilon: c, s, u
    std::array<double, 3> species_order{};
    double estimated_order = 0.0;  // slope of the per-epsilon maximum over species
    bool order_fitted = false;     // false when some error is exactly zero
    std::string reference_descriptor;

    [[nodiscard]] std::vector<double> max_errors() const;
    [[nodiscard]] std::string regime_descriptor() const;
};

/// Least-squares slope of log(error) against log(eps).
/// Throws DegenerateFitError for fewer than 3 points or any error <= 0.
double estimate_order(const std::vector<double>& eps_values, const std::vector<double>& errors);

ConvergenceReport run_convergence_study(const ConvergenceStudy& study);

/// Threads for concurrent epsilon runs: requested, else KCSIM_THREADS, else hardware.
unsigned resolve_thread_count(unsigned requested);

/**
 * CSV table (epsilon, error_c, error_s, error_u) followed by a '#' summary
 * line with the fitted orders. Regime and reference are recorded as '#'
 * metadata lines so read_report restores the full report.
 */
void write_report(std::ostream& os, const ConvergenceReport& report);
ConvergenceReport read_report(std::istream& is);

/// One-line summary of fitted orders.
std::string report_summary(const ConvergenceReport& report);

}  // namespace kcsim
