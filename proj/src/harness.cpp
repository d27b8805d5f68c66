#include "kcsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "kcsim/csv.hpp"
#include "kcsim/errors.hpp"

namespace kcsim {

namespace {

const char* const kColumns = "epsilon,error_c,error_s,error_u";

std::vector<double> default_snapshots(double t_final) {
    std::vector<double> times;
    for (int i = 1; i <= 4; ++i) times.push_back(t_final * i / 4.0);
    return times;
}

/// Reference snapshots (t > 0) on the kinetic grid.
std::vector<MacroState> diffusive_reference(const ConvergenceStudy& study, const std::vector<double>& times) {
    const std::size_t factor = study.reference_refinement;
    if (factor == 0) throw ValidationError("reference_refinement must be >= 1");
    const SpatialGrid fine{study.grid.length, study.grid.n_cells * factor};
    const VelocityGrid vgrid = build_uniform_grid(study.params.vmax, study.n_velocity);
    const MacroCoefficients coeff = build_macro_coefficients(study.params, vgrid);
    const MacroRun run = run_macro(study.initial.sample(fine), coeff, fine, study.t_final, times);
    std::vector<MacroState> out;
    for (std::size_t i = 1; i < run.snapshots.size(); ++i) out.push_back(restrict_average(run.snapshots[i], factor));
    return out;
}

std::vector<MacroState> ode_reference(const ConvergenceStudy& study, const std::vector<double>& times) {
    const MacroState start = study.initial.sample(study.grid);
    const std::size_t n = study.grid.n_cells;
    std::vector<MacroState> out(times.size(), MacroState::constant(n, 0.0, 0.0, 0.0));
    // Identical cells share one integration.
    std::map<std::array<double, 3>, std::vector<SirState>> cache;
    for (std::size_t k = 0; k < n; ++k) {
        const std::array<double, 3> key{start.c[k], start.s[k], start.u[k]};
        auto it = cache.find(key);
        if (it == cache.end()) {
            std::vector<SirState> path;
            SirState state{key[0], key[1], key[2]};
            double t = 0.0;
            for (const double target : times) {
                state = integrate_sir_final(state, study.params, target - t, study.ode_reference_dt);
                t = target;
                path.push_back(state);
            }
            it = cache.emplace(key, std::move(path)).first;
        }
        for (std::size_t i = 0; i < times.size(); ++i) {
            out[i].c[k] = it->second[i].u;
            out[i].s[k] = it->second[i].v;
            out[i].u[k] = it->second[i].w;
            out[i].time = times[i];
        }
    }
    return out;
}

std::array<double, 3> l2_errors(const std::vector<MacroState>& kinetic, const std::vector<MacroState>& reference,
                                const SpatialGrid& grid) {
    std::array<double, 3> sums{};
    for (std::size_t t = 0; t < reference.size(); ++t) {
        const MacroState& m = kinetic[t + 1];  // kinetic snapshots include t = 0
        const MacroState& r = reference[t];
        for (std::size_t k = 0; k < grid.n_cells; ++k) {
            sums[0] += (m.c[k] - r.c[k]) * (m.c[k] - r.c[k]);
            sums[1] += (m.s[k] - r.s[k]) * (m.s[k] - r.s[k]);
            sums[2] += (m.u[k] - r.u[k]) * (m.u[k] - r.u[k]);
        }
    }
    std::array<double, 3> errors{};
    for (int i = 0; i < 3; ++i) errors[i] = std::sqrt(sums[i] * grid.dx() / static_cast<double>(reference.size()));
    return errors;
}

}  // namespace

Regime classify_regime(const ModelParams& params) {
    const auto all = [&](int v) { return params.q1 == v && params.q2 == v && params.q3 == v && params.p == v; };
    if (all(1)) return Regime::Diffusive;
    if (all(2)) return Regime::OdeLimit;
    std::ostringstream os;
    os << "no limit model implemented for q1=" << params.q1 << ", q2=" << params.q2 << ", q3=" << params.q3
       << ", p=" << params.p << " (supported: all 1 or all 2)";
    throw RegimeError(os.str());
}

std::vector<double> ConvergenceReport::max_errors() const {
    std::vector<double> out;
    for (const auto& e : errors) out.push_back(std::max({e[0], e[1], e[2]}));
    return out;
}

std::string ConvergenceReport::regime_descriptor() const {
    std::ostringstream os;
    os << "q1=" << regime[0] << ",q2=" << regime[1] << ",q3=" << regime[2] << ",p=" << regime[3];
    return os.str();
}

double estimate_order(const std::vector<double>& eps_values, const std::vector<double>& errors) {
    if (eps_values.size() != errors.size()) throw DegenerateFitError("eps and error lists differ in length");
    if (eps_values.size() < 3) throw DegenerateFitError("order fit needs at least 3 points");
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!(errors[i] > 0.0) || !(eps_values[i] > 0.0))
            throw DegenerateFitError("order fit needs strictly positive eps and errors");
    const auto n = static_cast<double>(errors.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        mx += std::log(eps_values[i]);
        my += std::log(errors[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        const double dx = std::log(eps_values[i]) - mx;
        sxy += dx * (std::log(errors[i]) - my);
        sxx += dx * dx;
    }
    if (!(sxx > 0.0)) throw DegenerateFitError("eps values must not all coincide");
    return sxy / sxx;
}

unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("KCSIM_THREADS")) {
        const long value = std::strtol(env, nullptr, 10);
        if (value > 0) return static_cast<unsigned>(value);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ConvergenceReport run_convergence_study(const ConvergenceStudy& study) {
    study.params.validate_operators();
    study.grid.validate();
    const Regime regime = classify_regime(study.params);
    if (study.eps_list.size() < 3) throw DegenerateFitError("eps_list needs at least 3 values for an order fit");
    for (std::size_t i = 0; i < study.eps_list.size(); ++i) {
        const double eps = study.eps_list[i];
        if (!(eps > 0.0 && eps <= 1.0)) throw ValidationError("every epsilon must lie in (0, 1]");
        if (i > 0 && !(eps < study.eps_list[i - 1])) throw ValidationError("eps_list must be strictly decreasing");
    }
    if (!(study.t_final > 0.0)) throw ValidationError("t_final must be > 0 for a convergence study");

    const std::vector<double> times =
        snapshot_schedule(study.t_final, study.snapshot_times.empty() ? default_snapshots(study.t_final) : study.snapshot_times);

    ConvergenceReport report;
    report.regime = {study.params.q1, study.params.q2, study.params.q3, study.params.p};
    report.eps_values = study.eps_list;

    std::vector<MacroState> reference;
    if (regime == Regime::Diffusive) {
        reference = diffusive_reference(study, times);
        std::ostringstream os;
        os << "run_macro rk4 n_cells=" << study.grid.n_cells * study.reference_refinement << " averaged x"
           << study.reference_refinement;
        report.reference_descriptor = os.str();
    } else {
        reference = ode_reference(study, times);
        report.reference_descriptor = "integrate_sir per cell dt=" + format_double(study.ode_reference_dt);
    }

    const VelocityGrid vgrid = build_uniform_grid(study.params.vmax, study.n_velocity);
    const MacroState initial_macro = study.initial.sample(study.grid);
    const std::size_t n_runs = study.eps_list.size();
    report.errors.assign(n_runs, {});
    std::vector<std::exception_ptr> failures(n_runs);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n_runs; i = next++) {
            try {
                KineticSolver solver(study.params, vgrid, study.grid, study.eps_list[i], study.transport);
                const KineticState init = solver.init_local_equilibrium(initial_macro);
                KineticRunOptions options;
                options.cfl = study.cfl;
                const KineticRun run = run_kinetic(solver, init, study.t_final, times, options);
                report.errors[i] = l2_errors(run.snapshots, reference, study.grid);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::min<unsigned>(resolve_thread_count(study.threads), static_cast<unsigned>(n_runs));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& failure : failures)
        if (failure) std::rethrow_exception(failure);

    const auto maxima = report.max_errors();
    report.order_fitted = std::all_of(maxima.begin(), maxima.end(), [](double e) { return e > 0.0; });
    for (const auto& e : report.errors)
        for (double x : e) report.order_fitted = report.order_fitted && x > 0.0;
    if (report.order_fitted) {
        for (int s = 0; s < 3; ++s) {
            std::vector<double> column;
            for (const auto& e : report.errors) column.push_back(e[static_cast<std::size_t>(s)]);
            report.species_order[static_cast<std::size_t>(s)] = estimate_order(report.eps_values, column);
        }
        report.estimated_order = estimate_order(report.eps_values, maxima);
    }
    return report;
}

std::string report_summary(const ConvergenceReport& report) {
    std::ostringstream os;
    os << "fitted_order regime=" << report.regime_descriptor() << " c=" << format_double(report.species_order[0])
       << " s=" << format_double(report.species_order[1]) << " u=" << format_double(report.species_order[2])
       << " max=" << format_double(report.estimated_order) << " fitted=" << (report.order_fitted ? "true" : "false");
    return os.str();
}

void write_report(std::ostream& os, const ConvergenceReport& report) {
    os << "# regime = " << report.regime_descriptor() << '\n';
    os << "# reference = " << report.reference_descriptor << '\n';
    os << kColumns << '\n';
    for (std::size_t i = 0; i < report.eps_values.size(); ++i)
        write_csv_row(os, std::vector<double>{report.eps_values[i], report.errors[i][0], report.errors[i][1],
                                              report.errors[i][2]});
    os << "# " << report_summary(report) << '\n';
}

ConvergenceReport read_report(std::istream& is) {
    ConvergenceReport report;
    std::string line;
    bool header_seen = false;
    auto field = [](std::string_view text, std::string_view key) -> std::string_view {
        const auto pos = text.find(key);
        if (pos == std::string_view::npos) throw ParseError("report summary lacks '" + std::string(key) + "'");
        const auto start = pos + key.size();
        return text.substr(start, text.find(' ', start) - start);
    };
    while (std::getline(is, line)) {
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            const std::string_view body = trim(text.substr(1));
            if (body.starts_with("regime = ")) {
                int q1 = 0, q2 = 0, q3 = 0, p = 0;
                const std::string value(body.substr(9));
                if (std::sscanf(value.c_str(), "q1=%d,q2=%d,q3=%d,p=%d", &q1, &q2, &q3, &p) != 4)
                    throw ParseError("malformed regime line: " + value);
                report.regime = {q1, q2, q3, p};
            } else if (body.starts_with("reference = ")) {
                report.reference_descriptor = std::string(body.substr(12));
            } else if (body.starts_with("fitted_order ")) {
                report.species_order[0] = parse_double(field(body, " c="), "order_c");
                report.species_order[1] = parse_double(field(body, " s="), "order_s");
                report.species_order[2] = parse_double(field(body, " u="), "order_u");
                report.estimated_order = parse_double(field(body, " max="), "order_max");
                report.order_fitted = field(body, " fitted=") == "true";
            }
            continue;
        }
        if (!header_seen) {
            if (text != kColumns) throw ParseError("unexpected report columns: " + std::string(text));
            header_seen = true;
            continue;
        }
        const auto cells = split_csv_row(text);
        if (cells.size() != 4) throw ParseError("report row needs 4 columns: " + std::string(text));
        report.eps_values.push_back(parse_double(cells[0], "epsilon"));
        report.errors.push_back({parse_double(cells[1], "error_c"), parse_double(cells[2], "error_s"),
                                 parse_double(cells[3], "error_u")});
    }
    if (!header_seen) throw ParseError("report has no column header");
    return report;
}

}  // namespace kcsim
