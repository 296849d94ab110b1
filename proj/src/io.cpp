// SPDX-License-Identifier: Apache-2.0
#include "qoct/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "qoct/errors.hpp"

namespace qoct::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t row) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ConfigError("CSV row " + std::to_string(row) + ": '" + std::string(field) + "' is not a number");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw ConfigError("failed to format a number");
  return std::string(buf, ptr);
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ConfigError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw ConfigError("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size() || columns.empty()) throw ConfigError("CSV header/column mismatch");
  const auto rows = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw ConfigError("CSV columns differ in length");
  }
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out += ',';
    out += header[j];
  }
  out += '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) out += ',';
      out += format_double(columns[j][r]);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> csv_header(std::string_view text) {
  const auto eol = text.find('\n');
  std::vector<std::string> out;
  for (auto f : split(trim(text.substr(0, eol)))) out.emplace_back(f);
  return out;
}

Series parse_series(std::string_view text, std::pair<std::string_view, std::string_view> expected) {
  Series s;
  std::size_t row = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++row;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (!header_seen) {
      if (fields.size() != 2 || fields[0] != expected.first || fields[1] != expected.second) {
        throw ConfigError("CSV header must be '" + std::string(expected.first) + "," +
                          std::string(expected.second) + "', got '" + std::string(line) + "'");
      }
      s.x_name = expected.first;
      s.y_name = expected.second;
      header_seen = true;
      continue;
    }
    if (fields.size() != 2) {
      throw ConfigError("CSV row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                        " fields, expected 2");
    }
    s.x.push_back(parse_number(fields[0], row));
    s.y.push_back(parse_number(fields[1], row));
  }
  if (!header_seen) throw ConfigError("CSV input is empty");
  return s;
}

Series parse_interferogram(std::string_view text, std::pair<std::string_view, std::string_view> expected) {
  auto s = parse_series(text, expected);
  if (s.x.size() < 2) throw ConfigError("interferogram needs at least 2 rows");
  const bool increasing = s.x[1] > s.x[0];
  for (std::size_t k = 0; k < s.x.size(); ++k) {
    if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) {
      throw ConfigError("CSV row " + std::to_string(k + 2) + " holds a non-finite value");
    }
    if (s.y[k] < 0.0) throw ConfigError("CSV row " + std::to_string(k + 2) + " has negative counts");
    if (k > 0) {
      const double d = s.x[k] - s.x[k - 1];
      if (!(increasing ? d > 0.0 : d < 0.0)) {
        throw ConfigError("axis column is not strictly monotonic at row " + std::to_string(k + 2));
      }
    }
  }
  return s;
}

}  // namespace qoct::io
