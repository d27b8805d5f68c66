/**
 * @file  config.hpp
 * @brief Flat key-value run configuration.
 *
 * Documents are INI-like: `[section]` headers, `key = value` lines, and `#`
 * comments. Every key has a default; unknown sections or keys are rejected.
 * docs/config.md lists the full schema.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kcsim/kinetic.hpp"
#include "kcsim/model.hpp"
#include "kcsim/profile.hpp"
#include "kcsim/space.hpp"

namespace kcsim {

enum class Subcommand { Ode, Macro, Kinetic, Converge, Coeffs };

Subcommand parse_subcommand(std::string_view name);
std::string_view subcommand_name(Subcommand sub);

/// One resolved key, in schema order, for run headers.
struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
    std::string symbol;  // model symbol or role of the key
};

struct RunConfig {
    ModelParams params;
    std::size_t n_velocity = 16;
    SpatialGrid grid;
    InitialProfile initial;
    std::optional<std::vector<double>> r_field;

    double t_final = 1.0;
    double dt = 1e-3;
    std::vector<double> snapshot_times;
    double epsilon = 0.1;
    std::vector<double> eps_list;
    double cfl = KineticSolver::kMaxCfl;
    TransportScheme transport = TransportScheme::Spectral;
    std::size_t reference_refinement = 4;
    double ode_reference_dt = 1e-4;
    std::uint64_t seed = 0;

    std::filesystem::path output_dir = ".";
    std::vector<ConfigEntry> entries;
};

/**
 * Parses and validates a configuration document. Relative file paths are
 * resolved against base_dir. Throws ParseError (with line and key) for
 * syntax problems and unknown keys, ValidationError for violated bounds.
 */
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);

/// Subcommand-specific preconditions beyond parse-time validation.
void validate_for(Subcommand sub, const RunConfig& config);

/// '#'-prefixed header lines: toolkit version, subcommand and every resolved key.
std::vector<std::string> config_header(Subcommand sub, const RunConfig& config);

std::string_view toolkit_version();

}  // namespace kcsim
