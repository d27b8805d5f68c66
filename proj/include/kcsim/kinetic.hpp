/**
 * @file  kinetic.hpp
 * @brief Time integration of the scaled three-species kinetic system
 *
 *   d_t f_i + (v/eps) d_x f_i = eps^{-(q_i+1)} T_i(f_i) + G_i(f_1, f_2, f_3, v)
 *
 * with T_1 = T_1^0 + eps^p T_1^1 (relaxation plus chemotactic perturbation)
 * and T_2, T_3 pure relaxation, on a periodic 1D grid.
 *
 * One step is a symmetric splitting
 *
 *   X(dt/2) R(dt/2) P(dt/2) G(dt) P(dt/2) R(dt/2) X(dt/2)
 *
 * X: transport, R: exact exponential relaxation, P: explicit chemotactic
 * perturbation, G: explicit interaction update.
 */
#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "kcsim/model.hpp"
#include "kcsim/space.hpp"
#include "kcsim/velocity.hpp"

namespace kcsim {

enum class TransportScheme {
    Spectral,  // exact periodic shift of the trigonometric interpolant
    Upwind,    // first-order upwind, positivity preserving for CFL <= 1
};

/// Distribution functions on the (cell x velocity) lattice, cell-major.
struct KineticState {
    std::vector<double> f1;
    std::vector<double> f2;
    std::vector<double> f3;
    double epsilon = 1.0;
    double time = 0.0;
};

/// Sub-steps that a step applies; all on by default.
struct KineticSwitches {
    bool transport = true;
    bool relaxation = true;
    bool perturbation = true;
    bool interaction = true;
};

/// Zeroth velocity moments (c, s, u) per cell.
MacroState moments(const KineticState& state, const VelocityGrid& vgrid);

/**
 * Owns the discretization of one kinetic run at fixed epsilon.
 *
 * Not safe for concurrent use of a single instance (it keeps FFT scratch
 * buffers); independent instances may run on different threads.
 */
class KineticSolver {
public:
    static constexpr double kMaxCfl = 0.9;

    KineticSolver(ModelParams params, VelocityGrid vgrid, SpatialGrid grid, double epsilon,
                  TransportScheme scheme = TransportScheme::Spectral,
                  KineticSwitches switches = {});
    ~KineticSolver();
    KineticSolver(const KineticSolver&) = delete;
    KineticSolver& operator=(const KineticSolver&) = delete;
    KineticSolver(KineticSolver&&) noexcept;
    KineticSolver& operator=(KineticSolver&&) noexcept;

    [[nodiscard]] const ModelParams& params() const { return params_; }
    [[nodiscard]] const VelocityGrid& velocity_grid() const { return vgrid_; }
    [[nodiscard]] const SpatialGrid& spatial_grid() const { return grid_; }
    [[nodiscard]] const Equilibria& equilibria() const { return eq_; }
    [[nodiscard]] double epsilon() const { return epsilon_; }

    /// cfl * eps * dx / vmax
    [[nodiscard]] double max_dt(double cfl = kMaxCfl) const;

    /// f_i(x, v) = M_i(v) (c, s, u)(x)
    [[nodiscard]] KineticState init_local_equilibrium(const MacroState& macro) const;

    /**
     * One full split step. Throws CflViolationError if dt exceeds max_dt()
     * and NegativityError if any f drops below -1e-12.
     */
    [[nodiscard]] KineticState step(const KineticState& state, double dt);

    // Individual sub-steps, in place.
    void transport(KineticState& state, double dt);
    void relax(KineticState& state, double dt) const;
    void perturb(KineticState& state, double dt) const;
    void interact(KineticState& state, double dt) const;

    /// exp(-sigma_i dt / eps^{q_i+1})
    [[nodiscard]] double relaxation_factor(int species, double dt) const;
    /// eps^{p - q_1 - 1}
    [[nodiscard]] double perturbation_rate() const;

private:
    struct Fft;

    void transport_field(std::vector<double>& f, double dt);
    void validate_state(const KineticState& state) const;

    ModelParams params_;
    VelocityGrid vgrid_;
    SpatialGrid grid_;
    Equilibria eq_;
    double epsilon_;
    TransportScheme scheme_;
    KineticSwitches switches_;
    std::unique_ptr<Fft> fft_;
};

struct KineticRunOptions {
    double cfl = KineticSolver::kMaxCfl;
    std::function<void(const MacroState&)> on_snapshot;
};

struct KineticRun {
    std::vector<MacroState> snapshots;
    KineticState final_state;
    std::size_t steps = 0;
};

/**
 * Repeated split steps up to t_final. Each interval between snapshot times
 * is cut into equal steps no larger than cfl * eps * dx / vmax, so snapshots
 * land exactly on the requested times. Snapshots include t = 0 and t_final.
 */
KineticRun run_kinetic(KineticSolver& solver, const KineticState& initial, double t_final,
                       const std::vector<double>& snapshot_times = {},
                       const KineticRunOptions& options = {});

}  // namespace kcsim
