#pragma once

// Scenario files: JSON with explicit units in every field name. Numeric
// fields may be written as {"value": x, "calibrated": true} to mark values
// fitted to reproduce a measurement rather than taken from a datasheet; the
// marker survives a load/save round trip.

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "core/analysis.hpp"
#include "core/detection.hpp"

namespace psiotdr::scenario {

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

private:
  std::vector<std::string> issues_;
};

struct AnalysisHints {
  std::optional<analysis::Window> fit_window_m;
  std::optional<analysis::Window> noise_window_m;
  std::vector<analysis::Window> air_regions_m;
  double min_prominence_db = analysis::kDefaultProminenceDb;
  bool operator==(const AnalysisHints&) const = default;
};

struct Scenario {
  std::string name;
  std::string description;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> shots;
  std::optional<double> duration_s;
  detection::Setup setup;
  double group_index_display = units::kDefaultGroupIndex;
  AnalysisHints analysis;
  std::set<std::string> calibrated;  // JSON pointers of calibrated values

  bool operator==(const Scenario&) const = default;

  /// shots, or floor(repetition rate * duration).
  std::uint64_t shot_count() const;
  analysis::Options analysis_options() const;
};

/// Throws ConfigError: parse errors name the line, schema errors list every field.
Scenario from_json(const std::string& text);
Scenario load_file(const std::string& path);
std::string to_json(const Scenario& s);

/// Every invariant violation (empty when valid).
std::vector<std::string> validate(const Scenario& s);

/// 16 hex digits, FNV-1a over the canonical JSON.
std::string hash(const Scenario& s);

struct Diagnostics {
  double round_trip_s = 0.0;
  double max_repetition_rate_hz = 0.0;
  double repetition_rate_hz = 0.0;
  std::uint64_t shots = 0;
  double per_shot_probability = 0.0;
  std::vector<std::string> warnings;
};

/// Derived quantities for a valid scenario, plus pile-up and dispersion warnings.
Diagnostics diagnose(const Scenario& s);

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
Scenario preset(const std::string& name);

}  // namespace psiotdr::scenario
