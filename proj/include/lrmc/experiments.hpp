#pragma once

// Named experiment presets and the report envelope shared by every CLI
// subcommand. A preset is a fixed pipeline driven by one root seed; module
// seeds are the root plus the fixed offsets below.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lrmc {

std::string_view version();

inline constexpr std::uint64_t kGccSeedOffset = 0;
inline constexpr std::uint64_t kEstimatorSeedOffset = 10000;
inline constexpr std::uint64_t kFiberSeedOffset = 20000;
inline constexpr std::uint64_t kCompleterSeedOffset = 30000;
/// Patterns inside one preset are spaced by this much within a module's range.
inline constexpr std::uint64_t kPatternSeedStride = 1000;

struct ExperimentPreset {
  std::string name;
  std::string description;
  std::string reference;  // the claim a reference-backed preset checks; empty for evidence-only presets
  bool has_expected = false;
};

const std::vector<ExperimentPreset>& experiment_presets();

struct ExperimentOptions {
  std::uint64_t seed = 0;
  int samples = 0;   // 0: the preset's own sample count
  int restarts = 0;  // 0: solver default
  unsigned threads = 0;
};

struct ExperimentResult {
  std::string name;
  bool has_expected = false;
  bool matched = true;  // meaningful only when has_expected
  std::string text;     // human-readable summary
  nlohmann::json body;  // deterministic given the options
  nlohmann::json config;
  std::string csv;      // histogram rows for presets that produce one
};

/// Throws ParameterError for an unknown preset name.
ExperimentResult run_experiment(const std::string& name, const ExperimentOptions& opt);

/// {"artifact", "version", "command", "seed", "config", "body", "wall_time_seconds"}.
nlohmann::json make_report(const std::string& command, std::uint64_t seed, const nlohmann::json& config,
                           const nlohmann::json& body, double wall_time_seconds);

}  // namespace lrmc
