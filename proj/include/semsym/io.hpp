#pragma once

// Symbol files: UTF-8 CSV, header `dim_0,...,dim_{M-1}`, one row per sample,
// shortest round-trip decimal formatting.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "semsym/batch.hpp"
#include "semsym/error.hpp"

namespace semsym::io {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string symbol_header(std::size_t dims) {
  std::string h;
  for (std::size_t c = 0; c < dims; ++c) {
    if (c) h += ',';
    h += "dim_" + std::to_string(c);
  }
  return h;
}

inline void write_symbols(std::ostream& os, const SymbolBatch& batch) {
  os << symbol_header(batch.cols()) << '\n';
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    for (std::size_t c = 0; c < batch.cols(); ++c) {
      if (c) os << ',';
      os << format_double(batch(r, c));
    }
    os << '\n';
  }
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::io_error, "cannot open '" + path + "' for writing");
  return os;
}

inline void write_symbols(const std::string& path, const SymbolBatch& batch) {
  std::ofstream os = open_output(path);
  write_symbols(os, batch);
  if (!os) throw Error(Errc::io_error, "failed writing '" + path + "'");
}

/// Header-only symbol file (zero samples).
inline void write_empty_symbols(const std::string& path, std::size_t dims) {
  std::ofstream os = open_output(path);
  os << symbol_header(dims) << '\n';
  if (!os) throw Error(Errc::io_error, "failed writing '" + path + "'");
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline SymbolBatch read_symbols(std::istream& is, const std::string& source_name = "<stream>") {
  auto fail = [&](std::size_t line, const std::string& why) -> Error {
    return Error(Errc::parse_error, source_name + ":" + std::to_string(line) + ": " + why);
  };
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw fail(1, "empty file (missing header)");
  ++line_no;
  const auto header = detail::split(detail::trim(line));
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (detail::trim(header[c]) != "dim_" + std::to_string(c)) {
      throw fail(line_no, "header cell " + std::to_string(c) + " must be 'dim_" + std::to_string(c) + "'");
    }
  }
  const std::size_t cols = header.size();
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string_view body = detail::trim(line);
    if (body.empty()) continue;
    const auto cells = detail::split(body);
    if (cells.size() != cols) {
      throw fail(line_no, "expected " + std::to_string(cols) + " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string_view cell = detail::trim(cells[c]);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || cell.empty()) {
        throw fail(line_no, "cell " + std::to_string(c) + " is not a number: '" + std::string(cell) + "'");
      }
      if (!std::isfinite(v)) throw fail(line_no, "cell " + std::to_string(c) + " is not finite");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw fail(line_no, "no data rows");
  return SymbolBatch(rows, cols, std::move(values), source_name);
}

inline SymbolBatch read_symbols(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::io_error, "cannot open '" + path + "'");
  return read_symbols(is, path);
}

}  // namespace semsym::io
