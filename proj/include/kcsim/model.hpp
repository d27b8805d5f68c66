/**
 * @file  model.hpp
 * @brief Model parameters and the spatially homogeneous May-Nowak SIR system.
 *
 *   du/dt = -d1 u - beta u w + r
 *   dv/dt = -d2 v + beta u w
 *   dw/dt = -d3 w + k v
 *
 * u: healthy cells, v: infected cells, w: free virus.
 */
#pragma once

#include <optional>
#include <vector>

namespace kcsim {

struct ModelParams {
    // reaction constants
    double d1 = 1.0;
    double d2 = 1.0;
    double d3 = 1.0;
    double beta = 1.0;
    double k = 1.0;
    double r = 1.0;
    // turning operators
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double sigma3 = 1.0;
    double chi0 = 0.0;
    // scaling exponents
    int q1 = 1;
    int q2 = 1;
    int q3 = 1;
    int p = 1;
    double vmax = 1.0;

    /// Throws ValidationError naming the first violated bound.
    void validate() const;
    /// Bounds the turning operators and scalings rely on; reaction rates may be zero.
    void validate_operators() const;
};

struct SirState {
    double u = 0.0;
    double v = 0.0;
    double w = 0.0;

    friend bool operator==(const SirState&, const SirState&) = default;
};

/// Euclidean norm of the difference.
double distance(const SirState& a, const SirState& b);
double norm(const SirState& a);

struct EquilibriumReport {
    double r0 = 0.0;
    SirState q0;
    std::optional<SirState> qstar;  // present iff r0 > 1
};

double basic_reproduction_number(const ModelParams& params);

EquilibriumReport equilibria(const ModelParams& params);

/// Right-hand side of the SIR system; the result is an increment, not a state.
SirState sir_rhs(const SirState& state, const ModelParams& params);

/// One classical RK4 step of size dt (no sign checks).
SirState rk4_step(const SirState& state, const ModelParams& params, double dt);

struct SirSample {
    double time = 0.0;
    SirState state;
};

/**
 * Fixed-step RK4 integration from t = 0 to t_final.
 *
 * Produces ceil(t_final/dt) + 1 samples; the last step is shortened so the
 * final sample lands exactly on t_final. Components below -1e-12 raise
 * NegativeStateError; smaller negative round-off is clamped to zero.
 */
std::vector<SirSample> integrate_sir(const SirState& initial, const ModelParams& params,
                                     double t_final, double dt);

/// Final state only; avoids storing the trajectory for long horizons.
SirState integrate_sir_final(const SirState& initial, const ModelParams& params,
                             double t_final, double dt);

}  // namespace kcsim
