// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qoct::io {

/// Two-column numeric series with a fixed header.
struct Series {
  std::string x_name;
  std::string y_name;
  std::vector<double> x;
  std::vector<double> y;
};

inline constexpr std::pair<std::string_view, std::string_view> kFdColumns{"wavelength_nm", "counts"};
inline constexpr std::pair<std::string_view, std::string_view> kTdColumns{"position_um", "counts"};
inline constexpr std::pair<std::string_view, std::string_view> kAscanColumns{"opd_um", "amplitude"};

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Writes `content` to a temporary sibling and renames it over `path`, so
/// readers never see a partial file. Creates missing parent directories.
void atomic_write(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

/// CSV text for any number of equally long columns.
std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);

/// Parses a two-column CSV. Throws ConfigError for a header other than
/// `expected` or malformed rows.
Series parse_series(std::string_view text, std::pair<std::string_view, std::string_view> expected);

/// parse_series plus the interferogram rules: strictly monotonic axis and
/// non-negative counts.
Series parse_interferogram(std::string_view text, std::pair<std::string_view, std::string_view> expected);

/// Header of the first line, split on commas.
std::vector<std::string> csv_header(std::string_view text);

}  // namespace qoct::io
