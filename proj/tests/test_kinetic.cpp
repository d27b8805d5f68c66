#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kcsim/errors.hpp"
#include "kcsim/kinetic.hpp"
#include "kcsim/profile.hpp"
#include "support/diffusion_limit.hpp"
#include "support/sampling.hpp"

using namespace kcsim;

namespace {

ModelParams endemic() {
    ModelParams p;
    p.r = 2.0;
    p.chi0 = 1.0;
    return p;
}

KineticSolver make_solver(const ModelParams& p, std::size_t n_cells = 32, double eps = 0.2,
                          TransportScheme scheme = TransportScheme::Spectral, KineticSwitches sw = {}) {
    return KineticSolver(p, build_uniform_grid(p.vmax, 8), SpatialGrid{1.0, n_cells}, eps, scheme, sw);
}

MacroState smooth(const SpatialGrid& grid) {
    InitialProfile profile;
    profile.kind = InitialProfile::Kind::Cosine;
    profile.base = {1.5, 0.5, 0.5};
    profile.amplitude = 0.3;
    return profile.sample(grid);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

double anisotropy(const std::vector<double>& f, const VelocityGrid& vgrid) {
    const std::size_t nv = vgrid.size();
    double sum = 0.0;
    for (std::size_t k = 0; k < f.size() / nv; ++k) {
        const double mean = velocity_average(std::span<const double>(f.data() + k * nv, nv), vgrid);
        for (std::size_t j = 0; j < nv; ++j) sum += std::pow(f[k * nv + j] - mean / vgrid.measure(), 2);
    }
    return std::sqrt(sum);
}

}  // namespace

TEST(KineticSolver, ConstructorValidation) {
    const ModelParams p = endemic();
    EXPECT_THROW(make_solver(p, 32, 0.0), ValidationError);
    EXPECT_THROW(make_solver(p, 32, 1.5), ValidationError);
    EXPECT_THROW(KineticSolver(p, build_uniform_grid(2.0, 8), SpatialGrid{1.0, 16}, 0.1), ValidationError);
    ModelParams bad = p;
    bad.q1 = 0;
    EXPECT_THROW(make_solver(bad), ValidationError);
}

TEST(KineticSolver, LocalEquilibriumInitialisation) {
    KineticSolver solver = make_solver(endemic(), 8);
    const KineticState s = solver.init_local_equilibrium(MacroState::constant(8, 1, 1, 1));
    for (double f : s.f1) EXPECT_DOUBLE_EQ(f, 0.5);
    for (double f : s.f3) EXPECT_DOUBLE_EQ(f, 0.5);
    const MacroState macro = smooth(solver.spatial_grid());
    const MacroState back = moments(solver.init_local_equilibrium(macro), solver.velocity_grid());
    EXPECT_LE(max_abs_diff(back.c, macro.c), 1e-12);
    EXPECT_LE(max_abs_diff(back.s, macro.s), 1e-12);
    EXPECT_LE(max_abs_diff(back.u, macro.u), 1e-12);
    MacroState negative = macro;
    negative.s[2] = -1.0;
    EXPECT_THROW(solver.init_local_equilibrium(negative), ValidationError);
}

TEST(Moments, Examples) {
    const auto vgrid = build_uniform_grid(1.0, 8);
    KineticState zero{std::vector<double>(16, 0.0), std::vector<double>(16, 0.0), std::vector<double>(16, 0.0), 0.1, 0.0};
    const MacroState z = moments(zero, vgrid);
    EXPECT_EQ(z.c, (std::vector<double>{0.0, 0.0}));
    KineticState s{std::vector<double>(16, 2.0 * 0.5), std::vector<double>(16, 3.0 * 0.5), std::vector<double>(16, 5.0 * 0.5), 0.1, 0.0};
    const MacroState m = moments(s, vgrid);
    EXPECT_NEAR(m.c[1], 2.0, 1e-14);
    EXPECT_NEAR(m.s[0], 3.0, 1e-14);
    EXPECT_NEAR(m.u[1], 5.0, 1e-14);
    s.f1.pop_back();
    EXPECT_THROW(moments(s, vgrid), ValidationError);
}

TEST(KineticStep, EndemicEquilibriumIsFixedPoint) {
    const ModelParams p = endemic();
    KineticSolver solver = make_solver(p, 16);
    const SirState q = *equilibria(p).qstar;
    const KineticState start = solver.init_local_equilibrium(MacroState::constant(16, q.u, q.v, q.w));
    KineticState s = start;
    for (int i = 0; i < 20; ++i) s = solver.step(s, solver.max_dt());
    EXPECT_LE(max_abs_diff(s.f1, start.f1), 1e-12);
    EXPECT_LE(max_abs_diff(s.f2, start.f2), 1e-12);
    EXPECT_LE(max_abs_diff(s.f3, start.f3), 1e-12);
}

TEST(KineticStep, GlobalEquilibriumWithoutSourcesIsUnchanged) {
    KineticSwitches sw;
    sw.perturbation = sw.interaction = false;
    for (auto scheme : {TransportScheme::Spectral, TransportScheme::Upwind}) {
        KineticSolver solver = make_solver(endemic(), 16, 0.2, scheme, sw);
        const KineticState start = solver.init_local_equilibrium(MacroState::constant(16, 1.2, 0.7, 0.3));
        const KineticState next = solver.step(start, solver.max_dt());
        EXPECT_LE(max_abs_diff(next.f1, start.f1), 1e-12);
        EXPECT_LE(max_abs_diff(next.f2, start.f2), 1e-12);
    }
}

TEST(KineticStep, MassConservedWithoutReactions) {
    ModelParams p = diffusion_limit::transport_only();
    p.chi0 = 1.0;
    for (auto scheme : {TransportScheme::Spectral, TransportScheme::Upwind}) {
        KineticSolver solver = make_solver(p, 32, 0.3, scheme);
        KineticState s = solver.init_local_equilibrium(smooth(solver.spatial_grid()));
        const MacroState m0 = moments(s, solver.velocity_grid());
        for (int i = 0; i < 1000; ++i) s = solver.step(s, solver.max_dt());
        const MacroState m1 = moments(s, solver.velocity_grid());
        const SpatialGrid& grid = solver.spatial_grid();
        EXPECT_NEAR(total_mass(m1.c, grid), total_mass(m0.c, grid), 1e-12);
        EXPECT_NEAR(total_mass(m1.s, grid), total_mass(m0.s, grid), 1e-12);
        EXPECT_NEAR(total_mass(m1.u, grid), total_mass(m0.u, grid), 1e-12);
    }
}

TEST(KineticStep, RelaxationKeepsMomentsAndDecaysExactly) {
    KineticSolver solver = make_solver(endemic(), 8, 0.5);
    std::mt19937_64 rng(17);
    KineticState s = solver.init_local_equilibrium(MacroState::constant(8, 1, 1, 1));
    for (double& f : s.f1) f = sampling::uniform(rng, 0.0, 2.0);
    for (double& f : s.f2) f = sampling::uniform(rng, 0.0, 2.0);
    const MacroState before = moments(s, solver.velocity_grid());
    const double a0 = anisotropy(s.f1, solver.velocity_grid());
    const double dt = 0.01;
    solver.relax(s, dt);
    const MacroState after = moments(s, solver.velocity_grid());
    EXPECT_LE(max_abs_diff(before.c, after.c), 1e-13);
    EXPECT_LE(max_abs_diff(before.s, after.s), 1e-13);
    const double factor = std::exp(-1.0 * dt / std::pow(0.5, 2));
    EXPECT_DOUBLE_EQ(solver.relaxation_factor(1, dt), factor);
    EXPECT_NEAR(anisotropy(s.f1, solver.velocity_grid()), a0 * factor, 1e-12);
}

TEST(KineticStep, PerturbationKeepsCellDensity) {
    KineticSolver solver = make_solver(endemic(), 16, 0.2);
    KineticState s = solver.init_local_equilibrium(smooth(solver.spatial_grid()));
    const MacroState before = moments(s, solver.velocity_grid());
    solver.perturb(s, solver.max_dt());
    const MacroState after = moments(s, solver.velocity_grid());
    EXPECT_LE(max_abs_diff(before.c, after.c), 1e-12);
    EXPECT_GT(max_abs_diff(s.f1, solver.init_local_equilibrium(before).f1), 0.0);
    EXPECT_DOUBLE_EQ(solver.perturbation_rate(), 1.0 / 0.2);
}

TEST(KineticStep, ErrorPaths) {
    KineticSolver solver = make_solver(endemic(), 16);
    KineticState s = solver.init_local_equilibrium(MacroState::constant(16, 1, 1, 1));
    EXPECT_THROW(static_cast<void>(solver.step(s, 1.01 * solver.max_dt())), CflViolationError);
    EXPECT_THROW(static_cast<void>(solver.step(s, 0.0)), CflViolationError);
    KineticState wrong_eps = s;
    wrong_eps.epsilon = 0.1;
    EXPECT_THROW(static_cast<void>(solver.step(wrong_eps, solver.max_dt())), ValidationError);
    s.f2[5] = -1.0;
    EXPECT_THROW(static_cast<void>(solver.step(s, solver.max_dt())), NegativityError);
}

TEST(RunKinetic, SnapshotContract) {
    KineticSolver solver = make_solver(endemic(), 16);
    const KineticState s = solver.init_local_equilibrium(smooth(solver.spatial_grid()));
    EXPECT_EQ(run_kinetic(solver, s, 0.0).snapshots.size(), 1u);
    const KineticRun run = run_kinetic(solver, s, 0.1, {0.05});
    ASSERT_EQ(run.snapshots.size(), 3u);
    for (std::size_t i = 1; i < run.snapshots.size(); ++i) EXPECT_GT(run.snapshots[i].time, run.snapshots[i - 1].time);
    EXPECT_EQ(run.snapshots.back().time, 0.1);
    EXPECT_DOUBLE_EQ(run.final_state.time, 0.1);
    KineticRunOptions options;
    options.cfl = 1.0;
    EXPECT_THROW(run_kinetic(solver, s, 0.1, {}, options), ValidationError);
}

TEST(RunKinetic, Deterministic) {
    KineticSolver a = make_solver(endemic(), 32);
    KineticSolver b = make_solver(endemic(), 32);
    const KineticState s = a.init_local_equilibrium(smooth(a.spatial_grid()));
    const KineticRun ra = run_kinetic(a, s, 0.05);
    const KineticRun rb = run_kinetic(b, s, 0.05);
    EXPECT_EQ(ra.final_state.f1, rb.final_state.f1);
    EXPECT_EQ(ra.final_state.f2, rb.final_state.f2);
    EXPECT_EQ(ra.final_state.f3, rb.final_state.f3);
}

TEST(RunKinetic, OdeLimitMatchesSir) {
    ModelParams p = endemic();
    p.q1 = p.q2 = p.q3 = p.p = 2;
    KineticSolver solver = make_solver(p, 8, 0.1);
    const SirState q0{2.0, 0.5, 0.2};
    const KineticRun run = run_kinetic(solver, solver.init_local_equilibrium(MacroState::constant(8, q0.u, q0.v, q0.w)), 1.0);
    const SirState ode = integrate_sir_final(q0, p, 1.0, 1e-4);
    const MacroState& m = run.snapshots.back();
    for (std::size_t k = 0; k < 8; ++k) {
        EXPECT_NEAR(m.c[k], ode.u, 1e-3);
        EXPECT_NEAR(m.s[k], ode.v, 1e-3);
        EXPECT_NEAR(m.u[k], ode.w, 1e-3);
    }
}

TEST(DiffusionLimit, ModerateEpsilonTracksHeatEquation) {
    const auto r = diffusion_limit::run(0.2, 32, 0.05, TransportScheme::Spectral, 8);
    EXPECT_LE(r.relative_l2, 0.02);
}
