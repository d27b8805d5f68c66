#include "kcsim/kinetic.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "kcsim/errors.hpp"
#include "kcsim/macro.hpp"

namespace kcsim {

namespace {

// FFTW planning is not thread safe.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

constexpr double kNegativeTolerance = 1e-12;

void enforce_nonnegative(std::vector<double>& f, const char* name, double time) {
    for (double& x : f) {
        if (x < -kNegativeTolerance) {
            std::ostringstream os;
            os << name << " = " << x << " below -" << kNegativeTolerance << " at t = " << time
               << " (dt too large for the chemotaxis strength)";
            throw NegativityError(os.str());
        }
        if (x < 0.0) x = 0.0;
    }
}

}  // namespace

struct KineticSolver::Fft {
    std::size_t n;
    double* real = nullptr;
    fftw_complex* spectrum = nullptr;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    // Phase factors per velocity node for the cached sub-step length.
    double cached_dt = -1.0;
    std::vector<std::complex<double>> phases;

    explicit Fft(std::size_t n_cells) : n(n_cells) {
        std::lock_guard lock(fftw_planner_mutex());
        real = fftw_alloc_real(n);
        spectrum = fftw_alloc_complex(n / 2 + 1);
        forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spectrum, FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), spectrum, real, FFTW_ESTIMATE);
    }
    ~Fft() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
        fftw_free(real);
        fftw_free(spectrum);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
};

MacroState moments(const KineticState& state, const VelocityGrid& vgrid) {
    const std::size_t nv = vgrid.size();
    if (nv == 0 || state.f1.size() % nv != 0) throw ValidationError("kinetic state does not match the velocity grid");
    const std::size_t n = state.f1.size() / nv;
    MacroState m{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n), state.time};
    for (std::size_t k = 0; k < n; ++k) {
        const std::span<const double> row1(state.f1.data() + k * nv, nv);
        const std::span<const double> row2(state.f2.data() + k * nv, nv);
        const std::span<const double> row3(state.f3.data() + k * nv, nv);
        m.c[k] = velocity_average(row1, vgrid);
        m.s[k] = velocity_average(row2, vgrid);
        m.u[k] = velocity_average(row3, vgrid);
    }
    return m;
}

KineticSolver::KineticSolver(ModelParams params, VelocityGrid vgrid, SpatialGrid grid, double epsilon,
                             TransportScheme scheme, KineticSwitches switches)
    : params_(params),
      vgrid_(std::move(vgrid)),
      grid_(grid),
      eq_(uniform_equilibria(vgrid_)),
      epsilon_(epsilon),
      scheme_(scheme),
      switches_(switches) {
    params_.validate_operators();
    grid_.validate();
    if (!(epsilon_ > 0.0 && epsilon_ <= 1.0)) throw ValidationError("epsilon must lie in (0, 1]");
    if (std::abs(vgrid_.vmax - params_.vmax) > 1e-14 * params_.vmax)
        throw ValidationError("velocity grid vmax differs from the model vmax");
    for (const auto* m : {&eq_.m1, &eq_.m2, &eq_.m3}) check_equilibrium(*m, vgrid_);
    if (scheme_ == TransportScheme::Spectral) fft_ = std::make_unique<Fft>(grid_.n_cells);
}

KineticSolver::~KineticSolver() = default;
KineticSolver::KineticSolver(KineticSolver&&) noexcept = default;
KineticSolver& KineticSolver::operator=(KineticSolver&&) noexcept = default;

double KineticSolver::max_dt(double cfl) const {
    return cfl * epsilon_ * grid_.dx() / vgrid_.vmax;
}

double KineticSolver::relaxation_factor(int species, double dt) const {
    const double sigma = species == 1 ? params_.sigma1 : species == 2 ? params_.sigma2 : params_.sigma3;
    const int q = species == 1 ? params_.q1 : species == 2 ? params_.q2 : params_.q3;
    return std::exp(-sigma * dt / std::pow(epsilon_, q + 1));
}

double KineticSolver::perturbation_rate() const {
    return std::pow(epsilon_, params_.p - params_.q1 - 1);
}

KineticState KineticSolver::init_local_equilibrium(const MacroState& macro) const {
    if (macro.size() != grid_.n_cells) throw ValidationError("macro state size does not match the grid");
    const std::size_t nv = vgrid_.size();
    const std::size_t n = grid_.n_cells;
    KineticState state{std::vector<double>(n * nv), std::vector<double>(n * nv),
                       std::vector<double>(n * nv), epsilon_, macro.time};
    for (std::size_t k = 0; k < n; ++k) {
        if (macro.c[k] < 0.0 || macro.s[k] < 0.0 || macro.u[k] < 0.0)
            throw ValidationError("macro densities must be nonnegative");
        for (std::size_t j = 0; j < nv; ++j) {
            state.f1[k * nv + j] = eq_.m1.values[j] * macro.c[k];
            state.f2[k * nv + j] = eq_.m2.values[j] * macro.s[k];
            state.f3[k * nv + j] = eq_.m3.values[j] * macro.u[k];
        }
    }
    return state;
}

void KineticSolver::validate_state(const KineticState& state) const {
    const std::size_t expected = grid_.n_cells * vgrid_.size();
    if (state.f1.size() != expected || state.f2.size() != expected || state.f3.size() != expected)
        throw ValidationError("kinetic state does not match the solver lattice");
    if (state.epsilon != epsilon_) throw ValidationError("kinetic state epsilon differs from the solver epsilon");
}

void KineticSolver::transport_field(std::vector<double>& f, double dt) {
    const std::size_t n = grid_.n_cells;
    const std::size_t nv = vgrid_.size();

    if (scheme_ == TransportScheme::Upwind) {
        std::vector<double> column(n);
        for (std::size_t j = 0; j < nv; ++j) {
            const double nu = vgrid_.speed(j) * dt / (epsilon_ * grid_.dx());
            for (std::size_t k = 0; k < n; ++k) column[k] = f[k * nv + j];
            for (std::size_t k = 0; k < n; ++k) {
                const double outflow = nu > 0.0 ? column[k] - column[grid_.left(k)]
                                                : column[grid_.right(k)] - column[k];
                f[k * nv + j] = column[k] - nu * outflow;
            }
        }
        return;
    }

    Fft& fft = *fft_;
    const std::size_t modes = n / 2 + 1;
    if (fft.cached_dt != dt) {
        fft.phases.resize(nv * modes);
        for (std::size_t j = 0; j < nv; ++j) {
            const double shift = vgrid_.speed(j) * dt / epsilon_;
            for (std::size_t m = 0; m < modes; ++m) {
                const double angle = -2.0 * std::numbers::pi * static_cast<double>(m) * shift / grid_.length;
                fft.phases[j * modes + m] = std::polar(1.0 / static_cast<double>(n), angle);
            }
        }
        fft.cached_dt = dt;
    }
    for (std::size_t j = 0; j < nv; ++j) {
        for (std::size_t k = 0; k < n; ++k) fft.real[k] = f[k * nv + j];
        fftw_execute(fft.forward);
        for (std::size_t m = 0; m < modes; ++m) {
            const std::complex<double> z(fft.spectrum[m][0], fft.spectrum[m][1]);
            const std::complex<double> shifted = z * fft.phases[j * modes + m];
            fft.spectrum[m][0] = shifted.real();
            fft.spectrum[m][1] = shifted.imag();
        }
        fftw_execute(fft.backward);
        for (std::size_t k = 0; k < n; ++k) f[k * nv + j] = fft.real[k];
    }
}

void KineticSolver::transport(KineticState& state, double dt) {
    transport_field(state.f1, dt);
    transport_field(state.f2, dt);
    transport_field(state.f3, dt);
}

void KineticSolver::relax(KineticState& state, double dt) const {
    const std::size_t nv = vgrid_.size();
    const EquilibriumDistribution* ms[] = {&eq_.m1, &eq_.m2, &eq_.m3};
    std::vector<double>* fs[] = {&state.f1, &state.f2, &state.f3};
    for (int i = 0; i < 3; ++i) {
        const double decay = relaxation_factor(i + 1, dt);
        const auto& m = ms[i]->values;
        auto& f = *fs[i];
        for (std::size_t k = 0; k < grid_.n_cells; ++k) {
            double* row = f.data() + k * nv;
            const double mean = velocity_average(std::span<const double>(row, nv), vgrid_);
            for (std::size_t j = 0; j < nv; ++j) {
                const double equilibrium = m[j] * mean;
                row[j] = equilibrium + (row[j] - equilibrium) * decay;
            }
        }
    }
}

void KineticSolver::perturb(KineticState& state, double dt) const {
    if (params_.chi0 == 0.0) return;
    const std::size_t nv = vgrid_.size();
    const std::size_t n = grid_.n_cells;
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k)
        s[k] = velocity_average(std::span<const double>(state.f2.data() + k * nv, nv), vgrid_);

    const ChemotaxisKernel kernel{params_.chi0};
    const double scale = dt * perturbation_rate();
    std::vector<double> grad(1);
    for (std::size_t k = 0; k < n; ++k) {
        grad[0] = (s[grid_.right(k)] - s[grid_.left(k)]) / (2.0 * grid_.dx());
        double* row = state.f1.data() + k * nv;
        const auto turned = perturbation_operator_apply(std::span<const double>(row, nv), grad, kernel, vgrid_);
        for (std::size_t j = 0; j < nv; ++j) row[j] += scale * turned[j];
    }
}

void KineticSolver::interact(KineticState& state, double dt) const {
    const std::size_t nv = vgrid_.size();
    for (std::size_t k = 0; k < grid_.n_cells; ++k) {
        const std::size_t off = k * nv;
        const auto g = interaction_terms(std::span<const double>(state.f1.data() + off, nv),
                                         std::span<const double>(state.f2.data() + off, nv),
                                         std::span<const double>(state.f3.data() + off, nv), eq_, params_,
                                         vgrid_);
        for (std::size_t j = 0; j < nv; ++j) {
            state.f1[off + j] += dt * g.g1[j];
            state.f2[off + j] += dt * g.g2[j];
            state.f3[off + j] += dt * g.g3[j];
        }
    }
}

KineticState KineticSolver::step(const KineticState& state, double dt) {
    validate_state(state);
    const double limit = max_dt();
    if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "kinetic dt = " << dt << " violates dt <= " << kMaxCfl << " eps dx / vmax = " << limit;
        throw CflViolationError(os.str());
    }

    KineticState next = state;
    const double half = 0.5 * dt;
    if (switches_.transport) transport(next, half);
    if (switches_.relaxation) relax(next, half);
    if (switches_.perturbation) perturb(next, half);
    if (switches_.interaction) interact(next, dt);
    if (switches_.perturbation) perturb(next, half);
    if (switches_.relaxation) relax(next, half);
    if (switches_.transport) transport(next, half);

    next.time = state.time + dt;
    enforce_nonnegative(next.f1, "f1", next.time);
    enforce_nonnegative(next.f2, "f2", next.time);
    enforce_nonnegative(next.f3, "f3", next.time);
    return next;
}

KineticRun run_kinetic(KineticSolver& solver, const KineticState& initial, double t_final,
                       const std::vector<double>& snapshot_times, const KineticRunOptions& options) {
    if (!(t_final >= 0.0)) throw ValidationError("t_final must be >= 0");
    if (!(options.cfl > 0.0) || options.cfl > KineticSolver::kMaxCfl)
        throw ValidationError("kinetic cfl must lie in (0, 0.9]");
    const VelocityGrid& vgrid = solver.velocity_grid();
    const double dt_max = solver.max_dt(options.cfl);

    KineticRun run;
    KineticState state = initial;
    auto emit = [&](const KineticState& s) {
        run.snapshots.push_back(moments(s, vgrid));
        if (options.on_snapshot) options.on_snapshot(run.snapshots.back());
    };
    emit(state);

    for (const double target : snapshot_schedule(t_final, snapshot_times)) {
        const double start = state.time;
        const double span = target - start;
        if (span <= 0.0) {
            emit(state);
            continue;
        }
        const auto n = static_cast<std::size_t>(std::ceil(span / dt_max * (1.0 - 1e-12)));
        const double dt = span / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            state = solver.step(state, dt);
            ++run.steps;
        }
        state.time = target;
        emit(state);
    }
    run.final_state = std::move(state);
    return run;
}

}  // namespace kcsim
