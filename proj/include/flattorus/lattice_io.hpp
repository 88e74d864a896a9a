#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "flattorus/lattice.hpp"

namespace flattorus {

/// Reads the text format: a line holding n, then n lines of n decimal numbers.
/// Parsing ignores the global locale.  Throws ParseError on malformed input and
/// DegenerateBasis on a singular basis.
Lattice read_lattice(std::istream& in);
Lattice read_lattice_file(const std::string& path);

/// Writes the same format with 17 significant digits, which round-trips.
void write_lattice(std::ostream& out, const Lattice& lattice);
void write_lattice_file(const std::string& path, const Lattice& lattice);

/// Shortest-form-independent rendering: %.17g via to_chars.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Parses a vector written as numbers separated by commas and/or spaces.
Vector parse_vector(std::string_view text);

}  // namespace flattorus
