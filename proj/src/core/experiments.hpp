#pragma once

// Repeated acquisitions: distance accuracy as the spread of the measured
// separation between the two strongest peaks.

#include <cstdint>
#include <optional>

#include "core/analysis.hpp"
#include "core/scenario.hpp"

namespace psiotdr::experiments {

struct AccuracyOptions {
  std::size_t repeats = 10;
  bool identical_seeds = false;  // every repeat reuses the scenario seed
  unsigned threads = 0;
  std::optional<std::uint64_t> shots;  // overrides the scenario
  std::optional<std::uint64_t> seed;   // overrides the scenario
};

/// Throws AnalysisError naming the repeat when its two strongest peaks are not resolvable.
analysis::Accuracy accuracy(const scenario::Scenario& s, const AccuracyOptions& opt);

}  // namespace psiotdr::experiments
