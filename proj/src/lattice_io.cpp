#include "flattorus/lattice_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace flattorus {

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                    std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw ParseError("not a decimal number: '" + std::string(text) + "'");
  }
  return value;
}

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() &&
           (line[pos] == ' ' || line[pos] == '\t' || line[pos] == ',' || line[pos] == '\r')) {
      ++pos;
    }
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' &&
           line[pos] != ',' && line[pos] != '\r') {
      ++pos;
    }
    if (pos > start) tokens.push_back(line.substr(start, pos - start));
  }
  return tokens;
}

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!split_tokens(line).empty()) return true;
  }
  return false;
}

}  // namespace

Vector parse_vector(std::string_view text) {
  const auto tokens = split_tokens(text);
  if (tokens.empty()) throw ParseError("empty vector");
  Vector v(static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = parse_double(tokens[i]);
  }
  return v;
}

Lattice read_lattice(std::istream& in) {
  std::string line;
  if (!next_content_line(in, line)) throw ParseError("missing dimension line");
  const auto header = split_tokens(line);
  if (header.size() != 1) throw ParseError("first line must hold only n");
  int n = 0;
  const auto h = header.front();
  const auto parsed = std::from_chars(h.data(), h.data() + h.size(), n);
  if (parsed.ec != std::errc() || parsed.ptr != h.data() + h.size() || n < 1) {
    throw ParseError("invalid dimension '" + std::string(h) + "'");
  }
  Matrix basis(n, n);
  for (int i = 0; i < n; ++i) {
    if (!next_content_line(in, line)) {
      throw ParseError("expected " + std::to_string(n) + " basis rows, got " +
                       std::to_string(i));
    }
    const auto tokens = split_tokens(line);
    if (static_cast<int>(tokens.size()) != n) {
      throw ParseError("row " + std::to_string(i + 1) + " has " +
                       std::to_string(tokens.size()) + " entries, expected " +
                       std::to_string(n));
    }
    for (int j = 0; j < n; ++j) {
      basis(i, j) = parse_double(tokens[static_cast<std::size_t>(j)]);
    }
  }
  if (next_content_line(in, line)) throw ParseError("trailing content after basis");
  try {
    return Lattice(std::move(basis));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

Lattice read_lattice_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open lattice file '" + path + "'");
  return read_lattice(in);
}

void write_lattice(std::ostream& out, const Lattice& lattice) {
  const int n = lattice.dim();
  out << n << '\n';
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j > 0) out << ' ';
      out << format_double(lattice.basis()(i, j));
    }
    out << '\n';
  }
}

void write_lattice_file(const std::string& path, const Lattice& lattice) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write lattice file '" + path + "'");
  write_lattice(out, lattice);
}

}  // namespace flattorus
