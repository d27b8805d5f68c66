#include "kcsim/macro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kcsim/errors.hpp"

namespace kcsim {

namespace {

void axpy_into(MacroState& out, const MacroState& x, double a, const MacroState& y) {
    for (std::size_t k = 0; k < x.size(); ++k) {
        out.c[k] = x.c[k] + a * y.c[k];
        out.s[k] = x.s[k] + a * y.s[k];
        out.u[k] = x.u[k] + a * y.u[k];
    }
}

void diffusion_rhs(const std::vector<double>& field, double d, const SpatialGrid& grid,
                   std::vector<double>& out) {
    const double scale = d / (grid.dx() * grid.dx());
    for (std::size_t k = 0; k < grid.n_cells; ++k)
        out[k] = scale * (field[grid.right(k)] - 2.0 * field[k] + field[grid.left(k)]);
}

}  // namespace

void MacroCoefficients::validate(const SpatialGrid& grid) const {
    for (double d : {Dc, Ds, Du})
        if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("diffusivities must be finite and >= 0");
    if (!std::isfinite(chi)) throw ValidationError("chi must be finite");
    if (r_field) {
        if (r_field->size() != grid.n_cells) throw ValidationError("r_field size does not match the grid");
        if (std::any_of(r_field->begin(), r_field->end(), [](double r) { return !(r >= 0.0); }))
            throw ValidationError("r_field must be nonnegative");
    }
}

MacroCoefficients build_macro_coefficients(const ModelParams& params, const VelocityGrid& vgrid) {
    params.validate_operators();
    const Equilibria eq = uniform_equilibria(vgrid);
    MacroCoefficients coeff;
    coeff.Dc = diffusion_tensor(eq.m1, params.sigma1, vgrid)(0, 0);
    coeff.Ds = diffusion_tensor(eq.m2, params.sigma2, vgrid)(0, 0);
    coeff.Du = diffusion_tensor(eq.m3, params.sigma3, vgrid)(0, 0);
    coeff.chi = chemotactic_sensitivity(vgrid, eq, params)(0, 0);
    coeff.reactions = params;
    return coeff;
}

MacroState macro_rhs(const MacroState& state, const MacroCoefficients& coeff, const SpatialGrid& grid) {
    const std::size_t n = grid.n_cells;
    const double dx = grid.dx();
    const ModelParams& p = coeff.reactions;
    MacroState rate{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n), state.time};

    // Face k carries the flux between cells k and k+1.
    std::vector<double> flux(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t kr = grid.right(k);
        const double drift = coeff.chi * (state.s[kr] - state.s[k]) / dx;
        const double upwind = drift > 0.0 ? state.c[k] : state.c[kr];
        flux[k] = drift * upwind - coeff.Dc * (state.c[kr] - state.c[k]) / dx;
    }
    diffusion_rhs(state.s, coeff.Ds, grid, rate.s);
    diffusion_rhs(state.u, coeff.Du, grid, rate.u);
    for (std::size_t k = 0; k < n; ++k) {
        const double infection = p.beta * state.c[k] * state.u[k];
        rate.c[k] = -(flux[k] - flux[grid.left(k)]) / dx - p.d1 * state.c[k] - infection + coeff.production(k);
        rate.s[k] += -p.d2 * state.s[k] + infection;
        rate.u[k] += -p.d3 * state.u[k] + p.k * state.s[k];
    }
    return rate;
}

double max_chemotactic_speed(const MacroState& state, const MacroCoefficients& coeff,
                             const SpatialGrid& grid) {
    double amax = 0.0;
    for (std::size_t k = 0; k < grid.n_cells; ++k)
        amax = std::max(amax, std::abs(coeff.chi * (state.s[grid.right(k)] - state.s[k]) / grid.dx()));
    return amax;
}

double macro_step_limit(const MacroState& state, const MacroCoefficients& coeff,
                        const SpatialGrid& grid, double cfl) {
    // Diagonal coefficient of each species in one Euler step stays >= 1 - cfl.
    const double dx = grid.dx();
    const ModelParams& p = coeff.reactions;
    double umax = 0.0;
    for (double u : state.u) umax = std::max(umax, u);
    const double amax = max_chemotactic_speed(state, coeff, grid);
    const double rate_c = 2.0 * coeff.Dc / (dx * dx) + 2.0 * amax / dx + p.d1 + p.beta * umax;
    const double rate_s = 2.0 * coeff.Ds / (dx * dx) + p.d2;
    const double rate_u = 2.0 * coeff.Du / (dx * dx) + p.d3;
    const double rate = std::max({rate_c, rate_s, rate_u});
    return rate > 0.0 ? cfl / rate : std::numeric_limits<double>::infinity();
}

double macro_auto_dt(const MacroState& state, const MacroCoefficients& coeff, const SpatialGrid& grid) {
    return macro_step_limit(state, coeff, grid);
}

MacroState macro_step(const MacroState& state, const MacroCoefficients& coeff,
                      const SpatialGrid& grid, double dt, MacroTimeScheme scheme) {
    if (state.size() != grid.n_cells) throw ValidationError("macro state size does not match the grid");
    const double limit = macro_step_limit(state, coeff, grid);
    if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "macro dt = " << dt << " outside (0, " << limit << "]";
        throw StepSizeError(os.str());
    }

    MacroState next = state;
    if (scheme == MacroTimeScheme::ForwardEuler) {
        axpy_into(next, state, dt, macro_rhs(state, coeff, grid));
    } else {
        MacroState stage = state;
        const MacroState k1 = macro_rhs(state, coeff, grid);
        axpy_into(stage, state, 0.5 * dt, k1);
        const MacroState k2 = macro_rhs(stage, coeff, grid);
        axpy_into(stage, state, 0.5 * dt, k2);
        const MacroState k3 = macro_rhs(stage, coeff, grid);
        axpy_into(stage, state, dt, k3);
        const MacroState k4 = macro_rhs(stage, coeff, grid);
        const double h6 = dt / 6.0;
        for (std::size_t k = 0; k < state.size(); ++k) {
            next.c[k] = state.c[k] + h6 * (k1.c[k] + 2.0 * k2.c[k] + 2.0 * k3.c[k] + k4.c[k]);
            next.s[k] = state.s[k] + h6 * (k1.s[k] + 2.0 * k2.s[k] + 2.0 * k3.s[k] + k4.s[k]);
            next.u[k] = state.u[k] + h6 * (k1.u[k] + 2.0 * k2.u[k] + 2.0 * k3.u[k] + k4.u[k]);
        }
    }
    next.time = state.time + dt;
    next.enforce_nonnegative();
    return next;
}

std::vector<double> snapshot_schedule(double t_final, const std::vector<double>& requested) {
    std::vector<double> times;
    for (double t : requested) {
        if (!(t >= 0.0) || t > t_final * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "snapshot time " << t << " outside [0, " << t_final << "]";
            throw ValidationError(os.str());
        }
        if (t > 0.0 && t < t_final) times.push_back(t);
    }
    if (t_final > 0.0) times.push_back(t_final);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return times;
}

MacroRun run_macro(const MacroState& initial, const MacroCoefficients& coeff,
                   const SpatialGrid& grid, double t_final, const std::vector<double>& snapshot_times,
                   const MacroRunOptions& options) {
    grid.validate();
    coeff.validate(grid);
    if (!(t_final >= 0.0)) throw ValidationError("t_final must be >= 0");
    if (initial.size() != grid.n_cells) throw ValidationError("initial state size does not match the grid");

    MacroRun run;
    MacroState state = initial;
    state.enforce_nonnegative();
    run.snapshots.push_back(state);
    if (options.on_snapshot) options.on_snapshot(state);

    for (const double target : snapshot_schedule(t_final, snapshot_times)) {
        while (state.time < target) {
            double dt = options.max_dt > 0.0 ? options.max_dt : macro_auto_dt(state, coeff, grid);
            const double remaining = target - state.time;
            const bool last = dt >= remaining * (1.0 - 1e-12);
            if (last) dt = remaining;
            state = macro_step(state, coeff, grid, dt, options.scheme);
            if (last) state.time = target;
            ++run.steps;
        }
        run.snapshots.push_back(state);
        if (options.on_snapshot) options.on_snapshot(state);
    }
    run.final_state = state;
    return run;
}

}  // namespace kcsim
