#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "kcsim/cli.hpp"
#include "kcsim/csv.hpp"
#include "kcsim/errors.hpp"
#include "kcsim/harness.hpp"
#include "kcsim/macro.hpp"
#include "kcsim/velocity.hpp"

namespace kcsim {

namespace {

class OutputFile {
public:
    OutputFile(const std::filesystem::path& path, Subcommand sub, const RunConfig& config) : path_(path) {
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
        for (const auto& line : config_header(sub, config)) out_ << line << '\n';
    }

    std::ostream& stream() { return out_; }

    std::filesystem::path close() {
        out_.close();
        if (!out_) throw IoError("failed writing '" + path_.string() + "'");
        return path_;
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

void write_snapshot_rows(std::ostream& os, const MacroState& state, const SpatialGrid& grid) {
    for (std::size_t k = 0; k < state.size(); ++k)
        write_csv_row(os, std::vector<double>{state.time, grid.center(k), state.c[k], state.s[k], state.u[k]});
}

void write_coefficient_header(std::ostream& os, const MacroCoefficients& coeff) {
    os << "# coefficients Dc=" << format_double(coeff.Dc) << " Ds=" << format_double(coeff.Ds)
       << " Du=" << format_double(coeff.Du) << " chi=" << format_double(coeff.chi) << '\n';
}

std::vector<std::filesystem::path> run_ode(const RunConfig& config) {
    const auto& dir = config.output_dir;
    const auto samples = integrate_sir(config.initial.base, config.params, config.t_final, config.dt);

    OutputFile traj(dir / "ode_trajectory.csv", Subcommand::Ode, config);
    traj.stream() << "time,u,v,w\n";
    for (const auto& s : samples)
        write_csv_row(traj.stream(), std::vector<double>{s.time, s.state.u, s.state.v, s.state.w});

    const EquilibriumReport report = equilibria(config.params);
    OutputFile eq(dir / "ode_equilibria.csv", Subcommand::Ode, config);
    eq.stream() << "r0,point,u,v,w\n";
    auto row = [&](const char* name, const SirState& q) {
        write_csv_row(eq.stream(), std::vector<std::string>{format_double(report.r0), name, format_double(q.u),
                                                            format_double(q.v), format_double(q.w)});
    };
    row("q0", report.q0);
    if (report.qstar) row("qstar", *report.qstar);
    return {traj.close(), eq.close()};
}

std::vector<std::filesystem::path> run_macro_cmd(const RunConfig& config) {
    const VelocityGrid vgrid = build_uniform_grid(config.params.vmax, config.n_velocity);
    MacroCoefficients coeff = build_macro_coefficients(config.params, vgrid);
    coeff.r_field = config.r_field;
    coeff.validate(config.grid);

    OutputFile file(config.output_dir / "macro_snapshots.csv", Subcommand::Macro, config);
    write_coefficient_header(file.stream(), coeff);
    file.stream() << "time,x,c,s,u\n";
    MacroRunOptions options;
    options.on_snapshot = [&](const MacroState& s) { write_snapshot_rows(file.stream(), s, config.grid); };
    run_macro(config.initial.sample(config.grid), coeff, config.grid, config.t_final, config.snapshot_times, options);
    return {file.close()};
}

std::vector<std::filesystem::path> run_kinetic_cmd(const RunConfig& config) {
    const VelocityGrid vgrid = build_uniform_grid(config.params.vmax, config.n_velocity);
    KineticSolver solver(config.params, vgrid, config.grid, config.epsilon, config.transport);

    OutputFile file(config.output_dir / "kinetic_snapshots.csv", Subcommand::Kinetic, config);
    file.stream() << "# dt_max=" << format_double(solver.max_dt(config.cfl)) << '\n';
    file.stream() << "time,x,c,s,u\n";
    KineticRunOptions options;
    options.cfl = config.cfl;
    options.on_snapshot = [&](const MacroState& s) { write_snapshot_rows(file.stream(), s, config.grid); };
    const KineticState initial = solver.init_local_equilibrium(config.initial.sample(config.grid));
    run_kinetic(solver, initial, config.t_final, config.snapshot_times, options);
    return {file.close()};
}

std::vector<std::filesystem::path> run_converge(const RunConfig& config, std::ostream& log) {
    ConvergenceStudy study;
    study.params = config.params;
    study.grid = config.grid;
    study.n_velocity = config.n_velocity;
    study.initial = config.initial;
    study.t_final = config.t_final;
    study.snapshot_times = config.snapshot_times;
    study.eps_list = config.eps_list;
    study.transport = config.transport;
    study.cfl = config.cfl;
    study.reference_refinement = config.reference_refinement;
    study.ode_reference_dt = config.ode_reference_dt;

    const ConvergenceReport report = run_convergence_study(study);
    OutputFile file(config.output_dir / "convergence.csv", Subcommand::Converge, config);
    write_report(file.stream(), report);
    log << report_summary(report) << '\n';
    return {file.close()};
}

std::vector<std::filesystem::path> run_coeffs(const RunConfig& config) {
    const VelocityGrid vgrid = build_uniform_grid(config.params.vmax, config.n_velocity);
    const MacroCoefficients coeff = build_macro_coefficients(config.params, vgrid);
    OutputFile file(config.output_dir / "coefficients.csv", Subcommand::Coeffs, config);
    file.stream() << "Dc,Ds,Du,chi\n";
    write_csv_row(file.stream(), std::vector<double>{coeff.Dc, coeff.Ds, coeff.Du, coeff.chi});
    return {file.close()};
}

std::string quote(std::string_view text) {
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"' || ch == '\\') out += '\\';
        if (ch == '\n') {
            out += "\\n";
            continue;
        }
        out += ch;
    }
    return out + '"';
}

void report_error(std::ostream& err, std::string_view kind, int code, std::string_view message) {
    err << "error kind=" << kind << " code=" << code << " message=" << quote(message) << '\n';
}

}  // namespace

std::vector<std::filesystem::path> dispatch(Subcommand sub, const RunConfig& config, std::ostream& log) {
    validate_for(sub, config);
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + config.output_dir.string() + "': " + ec.message());
    switch (sub) {
    case Subcommand::Ode: return run_ode(config);
    case Subcommand::Macro: return run_macro_cmd(config);
    case Subcommand::Kinetic: return run_kinetic_cmd(config);
    case Subcommand::Converge: return run_converge(config, log);
    case Subcommand::Coeffs: return run_coeffs(config);
    }
    return {};
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kinetic chemotaxis-SIR simulator", "kcsim"};
    app.set_version_flag("--version", std::string(toolkit_version()));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    for (const char* name : {"ode", "macro", "kinetic", "converge", "coeffs"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << "kcsim " << toolkit_version() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        report_error(err, "ParseError", ParseError("").exit_code(), e.what());
        return ParseError("").exit_code();
    }

    try {
        const Subcommand sub = parse_subcommand(app.get_subcommands().front()->get_name());
        RunConfig config = load_config(config_path);
        if (!out_dir.empty()) config.output_dir = out_dir;
        for (const auto& path : dispatch(sub, config, out)) out << "wrote " << path.string() << '\n';
        return 0;
    } catch (const Error& e) {
        report_error(err, e.kind(), e.exit_code(), e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        report_error(err, "InternalError", 1, e.what());
        return 1;
    }
}

}  // namespace kcsim
