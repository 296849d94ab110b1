// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qoct::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kInputError = 2,
  kPhysicsError = 3,
  kAnalysisError = 4,
};

struct SimulateArgs {
  std::filesystem::path config;
  std::optional<std::string> mode;  // "fd" or "td"; must match the config
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

struct AnalyzeArgs {
  std::filesystem::path input;
  std::optional<std::string> mode;  // inferred from the CSV header when absent
  bool compensate = false;
  std::optional<std::pair<double, double>> band_nm;
  std::filesystem::path out = "analysis";
  double fringe_lambda_nm = 1360.0;
  double bandpass = 0.3;
  double prominence = 0.3;
  double max_pitch_um = 1.0;
};

struct SweepArgs {
  std::filesystem::path config;
  std::vector<double> ratios;
  std::size_t repeats = 5;
  std::optional<std::pair<double, double>> band_nm;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

struct BenchmarkArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
};

// Each command throws ConfigError / PhysicsError / AnalysisError; run()
// maps them to exit codes.
void simulate(const SimulateArgs& args, std::ostream& log);
void analyze(const AnalyzeArgs& args, std::ostream& log);
void sweep_gain(const SweepArgs& args, std::ostream& log);
void benchmark(const BenchmarkArgs& args, std::ostream& log);

/// Parses argv and dispatches to a subcommand. Exit codes: 0 ok, 2 input
/// error, 3 physics precondition, 4 analysis failure, 1 anything else.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "828:838" -> {828, 838}; throws ConfigError otherwise.
std::pair<double, double> parse_band(const std::string& text);

}  // namespace qoct::cli
