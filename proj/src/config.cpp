#include "kcsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "kcsim/csv.hpp"
#include "kcsim/errors.hpp"

#ifndef KCSIM_VERSION
#define KCSIM_VERSION "0.0.0"
#endif

namespace kcsim {

namespace {

struct Context {
    std::filesystem::path base_dir;
    std::string where;  // "line N, key section.key" for messages
};

using Setter = std::function<void(RunConfig&, std::string_view, const Context&)>;

struct SchemaKey {
    const char* section;
    const char* key;
    const char* default_value;
    const char* symbol;
    Setter set;
};

double to_double(std::string_view v, const Context& ctx) { return parse_double(v, ctx.where); }

long long to_integer(std::string_view v, const Context& ctx) {
    const std::string_view t = trim(v);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
        throw ParseError(ctx.where + ": cannot parse integer '" + std::string(t) + "'");
    return value;
}

std::size_t to_count(std::string_view v, const Context& ctx) {
    const long long value = to_integer(v, ctx);
    if (value < 0) throw ValidationError(ctx.where + ": must be >= 0");
    return static_cast<std::size_t>(value);
}

std::vector<double> to_list(std::string_view v, const Context& ctx) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    for (const auto& cell : split_csv_row(v)) out.push_back(to_double(cell, ctx));
    return out;
}

std::filesystem::path resolve(std::string_view v, const Context& ctx) {
    std::filesystem::path p{std::string(trim(v))};
    if (p.is_relative() && !ctx.base_dir.empty()) p = ctx.base_dir / p;
    if (!std::filesystem::exists(p)) throw ValidationError(ctx.where + ": file '" + p.string() + "' does not exist");
    return p;
}

/// Numeric rows of a small CSV file, skipping '#' comments and a non-numeric header.
std::vector<std::vector<double>> read_numeric_rows(const std::filesystem::path& path, std::size_t columns) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto cells = split_csv_row(text);
        if (rows.empty() && !cells.empty() && !cells[0].empty() &&
            (std::isalpha(static_cast<unsigned char>(cells[0][0])) != 0))
            continue;  // column header
        if (cells.size() != columns) {
            std::ostringstream os;
            os << path.string() << " line " << line_no << ": expected " << columns << " columns";
            throw ParseError(os.str());
        }
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(parse_double(c, path.string() + " line " + std::to_string(line_no)));
        rows.push_back(std::move(row));
    }
    return rows;
}

const std::vector<SchemaKey>& schema() {
    static const std::vector<SchemaKey> keys = {
        {"model", "d1", "1", "d_1 healthy-cell death rate", [](RunConfig& c, auto v, auto& x) { c.params.d1 = to_double(v, x); }},
        {"model", "d2", "1", "d_2 infected-cell death rate", [](RunConfig& c, auto v, auto& x) { c.params.d2 = to_double(v, x); }},
        {"model", "d3", "1", "d_3 virus decay rate", [](RunConfig& c, auto v, auto& x) { c.params.d3 = to_double(v, x); }},
        {"model", "beta", "1", "beta infection rate", [](RunConfig& c, auto v, auto& x) { c.params.beta = to_double(v, x); }},
        {"model", "k", "1", "k virus production rate", [](RunConfig& c, auto v, auto& x) { c.params.k = to_double(v, x); }},
        {"model", "r", "2", "r healthy-cell production rate", [](RunConfig& c, auto v, auto& x) { c.params.r = to_double(v, x); }},
        {"model", "r_file", "", "r(x) per-cell production (macro only)",
         [](RunConfig& c, auto v, auto& x) {
             if (trim(v).empty()) return;
             std::vector<double> field;
             for (const auto& row : read_numeric_rows(resolve(v, x), 1)) field.push_back(row[0]);
             c.r_field = std::move(field);
         }},
        {"model", "sigma1", "1", "sigma_1 relaxation rate of f_1", [](RunConfig& c, auto v, auto& x) { c.params.sigma1 = to_double(v, x); }},
        {"model", "sigma2", "1", "sigma_2 relaxation rate of f_2", [](RunConfig& c, auto v, auto& x) { c.params.sigma2 = to_double(v, x); }},
        {"model", "sigma3", "1", "sigma_3 relaxation rate of f_3", [](RunConfig& c, auto v, auto& x) { c.params.sigma3 = to_double(v, x); }},
        {"model", "chi0", "1", "chi_0 chemotaxis kernel strength", [](RunConfig& c, auto v, auto& x) { c.params.chi0 = to_double(v, x); }},
        {"model", "q1", "1", "q_1 scaling exponent", [](RunConfig& c, auto v, auto& x) { c.params.q1 = static_cast<int>(to_integer(v, x)); }},
        {"model", "q2", "1", "q_2 scaling exponent", [](RunConfig& c, auto v, auto& x) { c.params.q2 = static_cast<int>(to_integer(v, x)); }},
        {"model", "q3", "1", "q_3 scaling exponent", [](RunConfig& c, auto v, auto& x) { c.params.q3 = static_cast<int>(to_integer(v, x)); }},
        {"model", "p", "1", "p perturbation exponent", [](RunConfig& c, auto v, auto& x) { c.params.p = static_cast<int>(to_integer(v, x)); }},
        {"model", "vmax", "1", "vmax half-width of V = [-vmax, vmax]", [](RunConfig& c, auto v, auto& x) { c.params.vmax = to_double(v, x); }},
        {"velocity", "n_nodes", "16", "number of velocity nodes", [](RunConfig& c, auto v, auto& x) { c.n_velocity = to_count(v, x); }},
        {"space", "length", "1", "L periodic domain length", [](RunConfig& c, auto v, auto& x) { c.grid.length = to_double(v, x); }},
        {"space", "n_cells", "128", "number of cells", [](RunConfig& c, auto v, auto& x) { c.grid.n_cells = to_count(v, x); }},
        {"initial", "profile", "constant", "constant | cosine | file",
         [](RunConfig& c, auto v, auto& x) {
             const std::string_view t = trim(v);
             if (t == "constant") c.initial.kind = InitialProfile::Kind::Constant;
             else if (t == "cosine") c.initial.kind = InitialProfile::Kind::Cosine;
             else if (t == "file") c.initial.kind = InitialProfile::Kind::Cells;
             else throw ValidationError(x.where + ": unknown profile '" + std::string(t) + "'");
         }},
        {"initial", "c", "1.5", "c initial healthy-cell density", [](RunConfig& c, auto v, auto& x) { c.initial.base.u = to_double(v, x); }},
        {"initial", "s", "0.5", "s initial infected-cell density", [](RunConfig& c, auto v, auto& x) { c.initial.base.v = to_double(v, x); }},
        {"initial", "u", "0.5", "u initial virus density", [](RunConfig& c, auto v, auto& x) { c.initial.base.w = to_double(v, x); }},
        {"initial", "amplitude", "0.1", "relative cosine amplitude", [](RunConfig& c, auto v, auto& x) { c.initial.amplitude = to_double(v, x); }},
        {"initial", "mode", "1", "cosine wave number", [](RunConfig& c, auto v, auto& x) { c.initial.mode = static_cast<int>(to_integer(v, x)); }},
        {"initial", "file", "", "per-cell c,s,u file (profile = file)",
         [](RunConfig& c, auto v, auto& x) {
             if (trim(v).empty()) return;
             c.initial.cells.clear();
             for (const auto& row : read_numeric_rows(resolve(v, x), 3)) c.initial.cells.push_back({row[0], row[1], row[2]});
         }},
        {"run", "t_final", "1", "final time", [](RunConfig& c, auto v, auto& x) { c.t_final = to_double(v, x); }},
        {"run", "dt", "0.001", "ode time step", [](RunConfig& c, auto v, auto& x) { c.dt = to_double(v, x); }},
        {"run", "snapshot_times", "", "extra output times", [](RunConfig& c, auto v, auto& x) { c.snapshot_times = to_list(v, x); }},
        {"run", "epsilon", "0.1", "epsilon kinetic scaling parameter", [](RunConfig& c, auto v, auto& x) { c.epsilon = to_double(v, x); }},
        {"run", "eps_list", "0.4, 0.2, 0.1, 0.05", "epsilon sweep (strictly decreasing)", [](RunConfig& c, auto v, auto& x) { c.eps_list = to_list(v, x); }},
        {"run", "cfl", "0.9", "kinetic CFL number", [](RunConfig& c, auto v, auto& x) { c.cfl = to_double(v, x); }},
        {"run", "transport", "spectral", "spectral | upwind",
         [](RunConfig& c, auto v, auto& x) {
             const std::string_view t = trim(v);
             if (t == "spectral") c.transport = TransportScheme::Spectral;
             else if (t == "upwind") c.transport = TransportScheme::Upwind;
             else throw ValidationError(x.where + ": unknown transport '" + std::string(t) + "'");
         }},
        {"run", "reference_refinement", "4", "macro reference grid refinement", [](RunConfig& c, auto v, auto& x) { c.reference_refinement = to_count(v, x); }},
        {"run", "ode_reference_dt", "0.0001", "ode reference time step", [](RunConfig& c, auto v, auto& x) { c.ode_reference_dt = to_double(v, x); }},
        {"run", "seed", "0", "seed recorded for reproducibility", [](RunConfig& c, auto v, auto& x) { c.seed = static_cast<std::uint64_t>(to_count(v, x)); }},
        {"output", "dir", ".", "output directory", [](RunConfig& c, auto v, auto&) { c.output_dir = std::string(trim(v)); }},
    };
    return keys;
}

void validate_common(const RunConfig& c) {
    c.params.validate();
    c.grid.validate();
    if (c.n_velocity < 4 || c.n_velocity % 2 != 0) throw ValidationError("velocity.n_nodes must be even and >= 4");
    const SirState& b = c.initial.base;
    if (b.u < 0.0 || b.v < 0.0 || b.w < 0.0) throw ValidationError("initial densities must be >= 0");
    if (c.initial.kind == InitialProfile::Kind::Cosine) {
        if (std::abs(c.initial.amplitude) > 1.0) throw ValidationError("|initial.amplitude| <= 1 keeps densities nonnegative");
        if (c.initial.mode < 1) throw ValidationError("initial.mode must be >= 1");
    }
    if (c.initial.kind == InitialProfile::Kind::Cells) {
        if (c.initial.cells.empty()) throw ValidationError("profile = file requires initial.file");
        if (c.grid.n_cells % c.initial.cells.size() != 0)
            throw ValidationError("initial.file row count must divide space.n_cells");
        for (const SirState& s : c.initial.cells)
            if (s.u < 0.0 || s.v < 0.0 || s.w < 0.0) throw ValidationError("initial.file densities must be >= 0");
    }
    if (c.r_field) {
        if (c.r_field->size() != c.grid.n_cells) throw ValidationError("model.r_file needs one value per cell");
        for (double r : *c.r_field)
            if (!(r >= 0.0)) throw ValidationError("model.r_file values must be >= 0");
    }
    if (!(c.t_final >= 0.0)) throw ValidationError("run.t_final must be >= 0");
    if (!(c.dt > 0.0)) throw ValidationError("run.dt must be > 0");
    for (double t : c.snapshot_times)
        if (!(t >= 0.0 && t <= c.t_final)) throw ValidationError("run.snapshot_times must lie in [0, t_final]");
    if (!(c.epsilon > 0.0 && c.epsilon <= 1.0)) throw ValidationError("run.epsilon must lie in (0, 1]");
    for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
        if (!(c.eps_list[i] > 0.0 && c.eps_list[i] <= 1.0)) throw ValidationError("run.eps_list values must lie in (0, 1]");
        if (i > 0 && !(c.eps_list[i] < c.eps_list[i - 1])) throw ValidationError("run.eps_list must be strictly decreasing");
    }
    if (!(c.cfl > 0.0 && c.cfl <= KineticSolver::kMaxCfl)) throw ValidationError("run.cfl must lie in (0, 0.9]");
    if (c.reference_refinement < 1) throw ValidationError("run.reference_refinement must be >= 1");
    if (!(c.ode_reference_dt > 0.0)) throw ValidationError("run.ode_reference_dt must be > 0");
}

}  // namespace

std::string_view toolkit_version() { return KCSIM_VERSION; }

Subcommand parse_subcommand(std::string_view name) {
    if (name == "ode") return Subcommand::Ode;
    if (name == "macro") return Subcommand::Macro;
    if (name == "kinetic") return Subcommand::Kinetic;
    if (name == "converge") return Subcommand::Converge;
    if (name == "coeffs") return Subcommand::Coeffs;
    throw ParseError("unknown subcommand '" + std::string(name) + "'");
}

std::string_view subcommand_name(Subcommand sub) {
    switch (sub) {
    case Subcommand::Ode: return "ode";
    case Subcommand::Macro: return "macro";
    case Subcommand::Kinetic: return "kinetic";
    case Subcommand::Converge: return "converge";
    case Subcommand::Coeffs: return "coeffs";
    }
    return "?";
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    const auto& keys = schema();
    std::set<std::string> sections;
    for (const auto& s : keys) sections.insert(s.section);

    // section.key -> (value, line)
    std::map<std::string, std::pair<std::string, std::size_t>> given;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(where + ": unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!sections.contains(section)) throw ParseError(where + ": unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(where + ": expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        if (section.empty()) throw ParseError(where + ": key '" + key + "' appears before any [section]");
        const std::string full = section + "." + key;
        const bool known = std::any_of(keys.begin(), keys.end(),
                                       [&](const SchemaKey& s) { return section == s.section && key == s.key; });
        if (!known) throw ParseError(where + ": unknown key '" + key + "' in [" + section + "]");
        if (given.contains(full)) throw ParseError(where + ": duplicate key '" + full + "'");
        given[full] = {std::string(trim(line.substr(eq + 1))), line_no};
    }

    RunConfig config;
    for (const auto& key_def : keys) {
        const std::string full = std::string(key_def.section) + "." + key_def.key;
        const auto it = given.find(full);
        const std::string value = it != given.end() ? it->second.first : key_def.default_value;
        Context ctx{base_dir, (it != given.end() ? "line " + std::to_string(it->second.second) + ", " : std::string("default, ")) +
                                  "key " + full};
        key_def.set(config, value, ctx);
        config.entries.push_back({key_def.section, key_def.key, value, key_def.symbol});
    }
    validate_common(config);
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.parent_path());
}

void validate_for(Subcommand sub, const RunConfig& config) {
    if (sub != Subcommand::Macro && config.r_field)
        throw ValidationError("model.r_file is only supported by the macro subcommand");
}

std::vector<std::string> config_header(Subcommand sub, const RunConfig& config) {
    std::vector<std::string> lines;
    lines.push_back("# kcsim " + std::string(toolkit_version()));
    lines.push_back("# subcommand = " + std::string(subcommand_name(sub)));
    for (const auto& e : config.entries) {
        if (e.section == "output") continue;  // location only, not part of the run
        lines.push_back("# [" + e.section + "] " + e.key + " = " + e.value + "  (" + e.symbol + ")");
    }
    return lines;
}

}  // namespace kcsim
