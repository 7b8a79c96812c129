#pragma once

// Serialisation of analysis results: report JSON, trace CSV and an SVG plot.

#include <iosfwd>
#include <string>
#include <vector>

#include "core/analysis.hpp"

namespace psiotdr::report {

/// Fixed field names; absent quantities are null.
std::string to_json(const analysis::Report& r);

/// `distance_m,level_db,counts`
void write_trace_csv(const analysis::Trace& t, std::ostream& os);

/// Trace polyline with axes; peaks, when given, are marked.
void write_trace_svg(const analysis::Trace& t, std::ostream& os, const std::vector<analysis::Peak>& peaks = {});

}  // namespace psiotdr::report
