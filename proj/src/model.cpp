#include "kcsim/model.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "kcsim/errors.hpp"

namespace kcsim {

namespace {

constexpr double kNegativeTolerance = 1e-12;

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << name << " = " << value << " violates " << name << " > 0";
        throw ValidationError(os.str());
    }
}

void require_nonnegative(double value, const char* name) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << name << " = " << value << " violates " << name << " >= 0";
        throw ValidationError(os.str());
    }
}

void require_exponent(int value, const char* name, const char* bound) {
    if (value < 1) {
        std::ostringstream os;
        os << name << " = " << value << " violates " << bound;
        throw ValidationError(os.str());
    }
}

SirState axpy(const SirState& x, double a, const SirState& y) {
    return {x.u + a * y.u, x.v + a * y.v, x.w + a * y.w};
}

SirState checked(SirState s, double time) {
    for (double* c : {&s.u, &s.v, &s.w}) {
        if (*c < -kNegativeTolerance) {
            std::ostringstream os;
            os << "SIR component " << *c << " < -" << kNegativeTolerance << " at t = " << time
               << " (dt too large)";
            throw NegativeStateError(os.str());
        }
        if (*c < 0.0) *c = 0.0;
    }
    return s;
}

std::size_t step_count(double t_final, double dt) {
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    if (!(t_final >= 0.0)) throw ValidationError("t_final must be >= 0");
    const double ratio = t_final / dt;
    auto n = static_cast<std::size_t>(std::ceil(ratio));
    // ceil(1.0000000000000002) should not produce an extra sliver step
    if (n > 0 && static_cast<double>(n - 1) * dt >= t_final * (1.0 - 1e-14)) --n;
    return n;
}

void check_initial(const SirState& s) {
    if (s.u < 0.0 || s.v < 0.0 || s.w < 0.0) throw ValidationError("initial SIR state must be nonnegative");
}

}  // namespace

void ModelParams::validate() const {
    require_positive(d1, "d1");
    require_positive(d2, "d2");
    require_positive(d3, "d3");
    require_positive(beta, "beta");
    require_positive(k, "k");
    require_nonnegative(r, "r");
    validate_operators();
}

void ModelParams::validate_operators() const {
    for (const auto& [value, name] : {std::pair{d1, "d1"}, {d2, "d2"}, {d3, "d3"}, {beta, "beta"}, {k, "k"}, {r, "r"}})
        require_nonnegative(value, name);
    require_positive(sigma1, "sigma1");
    require_positive(sigma2, "sigma2");
    require_positive(sigma3, "sigma3");
    require_nonnegative(chi0, "chi0");
    require_positive(vmax, "vmax");
    require_exponent(q1, "q1", "q_i >= 1");
    require_exponent(q2, "q2", "q_i >= 1");
    require_exponent(q3, "q3", "q_i >= 1");
    require_exponent(p, "p", "p >= 1");
}

double distance(const SirState& a, const SirState& b) {
    return std::hypot(a.u - b.u, a.v - b.v, a.w - b.w);
}

double norm(const SirState& a) { return std::hypot(a.u, a.v, a.w); }

double basic_reproduction_number(const ModelParams& params) {
    return params.beta * params.k * params.r / (params.d1 * params.d2 * params.d3);
}

EquilibriumReport equilibria(const ModelParams& params) {
    EquilibriumReport report;
    report.r0 = basic_reproduction_number(params);
    report.q0 = {params.r / params.d1, 0.0, 0.0};
    if (report.r0 > 1.0) {
        const double excess = report.r0 - 1.0;
        report.qstar = SirState{params.r / (params.d1 * report.r0),
                                params.d1 * params.d3 * excess / (params.beta * params.k),
                                params.d1 * excess / params.beta};
    }
    return report;
}

SirState sir_rhs(const SirState& s, const ModelParams& params) {
    const double infection = params.beta * s.u * s.w;
    return {-params.d1 * s.u - infection + params.r,
            -params.d2 * s.v + infection,
            -params.d3 * s.w + params.k * s.v};
}

SirState rk4_step(const SirState& s, const ModelParams& params, double dt) {
    const SirState k1 = sir_rhs(s, params);
    const SirState k2 = sir_rhs(axpy(s, 0.5 * dt, k1), params);
    const SirState k3 = sir_rhs(axpy(s, 0.5 * dt, k2), params);
    const SirState k4 = sir_rhs(axpy(s, dt, k3), params);
    const double h6 = dt / 6.0;
    return {s.u + h6 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
            s.v + h6 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
            s.w + h6 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w)};
}

std::vector<SirSample> integrate_sir(const SirState& initial, const ModelParams& params,
                                     double t_final, double dt) {
    check_initial(initial);
    const std::size_t n = step_count(t_final, dt);
    std::vector<SirSample> trajectory;
    trajectory.reserve(n + 1);
    trajectory.push_back({0.0, initial});
    SirState s = initial;
    for (std::size_t i = 0; i < n; ++i) {
        const double t0 = static_cast<double>(i) * dt;
        const double t1 = (i + 1 == n) ? t_final : static_cast<double>(i + 1) * dt;
        s = checked(rk4_step(s, params, t1 - t0), t1);
        trajectory.push_back({t1, s});
    }
    return trajectory;
}

SirState integrate_sir_final(const SirState& initial, const ModelParams& params, double t_final,
                             double dt) {
    check_initial(initial);
    const std::size_t n = step_count(t_final, dt);
    SirState s = initial;
    for (std::size_t i = 0; i < n; ++i) {
        const double t0 = static_cast<double>(i) * dt;
        const double t1 = (i + 1 == n) ? t_final : static_cast<double>(i + 1) * dt;
        s = checked(rk4_step(s, params, t1 - t0), t1);
    }
    return s;
}

}  // namespace kcsim
