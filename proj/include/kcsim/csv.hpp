/**
 * @file  csv.hpp
 * @brief Number formatting and headered-CSV helpers shared by all outputs.
 *
 * Doubles are written with 17 significant digits so they round-trip exactly.
 */
#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace kcsim {

std::string format_double(double value);

/// Parses a double, rejecting trailing garbage; throws ParseError.
double parse_double(std::string_view text, std::string_view context);

void write_csv_row(std::ostream& os, const std::vector<std::string>& cells);
void write_csv_row(std::ostream& os, const std::vector<double>& values);

/// Splits on commas and trims surrounding whitespace of each field.
std::vector<std::string> split_csv_row(std::string_view line);

std::string_view trim(std::string_view text);

}  // namespace kcsim
