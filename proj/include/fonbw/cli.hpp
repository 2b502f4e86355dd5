#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "fonbw/compensate.hpp"
#include "fonbw/identify.hpp"
#include "fonbw/io.hpp"
#include "fonbw/models.hpp"

namespace fonbw {

std::string_view version() noexcept;

enum class Command { Simulate, Identify, Compensate, Fracdiff, Normalize, Metrics };

std::string_view to_string(Command c) noexcept;
Command command_from_string(std::string_view name);

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitData = 3,
  kExitDivergence = 4,
  kExitIdentification = 5,
};

/// Input signal: either a named generator or a CSV file, never both.
struct SignalSpec {
  std::string generator;  // sine_offset | sweep | multifreq
  double amplitude = 0.0;
  double frequency = 0.0;
  double duration = 0.0;
  std::filesystem::path csv;

  bool from_csv() const { return !csv.empty(); }
};

struct SolverSpec {
  std::optional<double> dt;  // generator step; a CSV brings its own
  Memory memory = Memory::unbounded();
  double divergence_guard = kDefaultDivergenceGuard;

  SimOptions sim() const { return {memory, divergence_guard}; }
};

struct IdentifySpec {
  std::size_t poly_order = 3;
  DeConfig de;
  /// Bounds relative to `params` (lo*|p|, hi*|p|, sign kept) when no explicit bounds are given.
  std::optional<std::pair<double, double>> bounds_scale;
  json explicit_bounds;  // {name: [lo, hi]}
  /// Fail with the identification exit code when the best objective ends above this.
  std::optional<double> max_objective;
};

struct CompensateSpec {
  CompensatorParams params;
  std::size_t fixed_point_iterations = 0;
};

struct RunConfig {
  Command command = Command::Simulate;
  std::optional<ModelKind> model_kind;
  std::optional<ModelParams> params;
  std::optional<SignalSpec> signal;
  SolverSpec solver;
  std::filesystem::path output_dir = "out";
  bool plot_data = false;
  std::uint64_t seed = 42;
  std::optional<IdentifySpec> identify;
  std::optional<CompensateSpec> compensate;
  double fracdiff_lambda = 0.5;
  std::optional<std::size_t> period_samples;
  double normalize_scale = 1.0;

  json document;  // the config as read, echoed into reports
};

/// Parse a config document. Relative CSV paths resolve against `base_dir`.
/// Throws ConfigError on malformed or inconsistent sections and when a referenced file is missing.
RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Command-line overrides applied after parsing.
struct Overrides {
  std::optional<Command> command;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<double> dt;
  std::optional<Memory> memory;
};

void apply_overrides(RunConfig& cfg, const Overrides& o);

/// Execute the configured command and write its artifacts. Throws on failure.
/// Returns the report that was written to `report.json`.
json execute(const RunConfig& cfg, std::ostream& log);

/// Map the exception currently being handled to an exit status.
int exit_code_for_current_exception(std::ostream& log);

/// Parse arguments, run, and return the process exit status.
int run_cli(int argc, char** argv, std::ostream& log);

}  // namespace fonbw
