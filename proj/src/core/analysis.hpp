#pragma once

// Histogram -> dB trace, and the figures of merit read off it: reflection
// peaks and their widths, attenuation slope, dynamic range, beat length.
//
// Display convention: level = 5*log10(counts) + offset, so a one-way
// attenuation of a dB/km reads directly as a slope of -a dB/km.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core/detection.hpp"
#include "core/units.hpp"

namespace psiotdr::analysis {

class AnalysisError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using Window = std::pair<double, double>;  // display metres

struct Trace {
  std::vector<double> distance_m;
  std::vector<double> level_db;
  std::vector<double> counts;     // raw histogram counts
  std::vector<double> corrected;  // pile-up corrected (Coates), in counts
  double spacing_m = 0.0;
  double offset_db = 0.0;
  std::uint64_t shots = 0;
  double group_index = units::kDefaultGroupIndex;

  std::size_t size() const { return distance_m.size(); }
  double floor_db() const;
  /// Index of the sample nearest to z, clamped to the trace.
  std::size_t index_of(double z) const;
};

/// Zero corrected counts are shown at 5*log10(0.5) + offset.
Trace to_trace(const detection::Histogram& h, units::GroupIndex ctx = {}, double offset_db = 0.0);

struct Peak {
  double position_m = 0.0;
  double height_db = 0.0;  // display dB above the local baseline
  double fwhm_m = 0.0;
  double area_counts = 0.0;
  double skewness = 0.0;
  bool asymmetric = false;
  double apex_counts = 0.0;
  double baseline_counts = 0.0;
};

inline constexpr double kDefaultProminenceDb = 3.0;
inline constexpr double kSkewThreshold = 0.1;

std::vector<Peak> find_peaks(const Trace& t, double min_prominence_db = kDefaultProminenceDb);

/// FWHM of the narrowest isolated peak (no neighbour within 1.5 FWHM).
double two_point_resolution(const std::vector<Peak>& peaks);
double two_point_resolution(const Trace& t);

/// Dip between two peaks at least `dip_db` (display) below the lower apex.
bool resolvable(const Trace& t, const Peak& a, const Peak& b, double dip_db = 3.0);

struct NoiseRegion {
  Window window;
  double mean_counts = 0.0;  // background per bin
};

/// Post-fibre region holding only dark counts; auto-detected when `hint` is empty.
std::optional<NoiseRegion> noise_region(const Trace& t, std::optional<Window> hint = {});

struct SlopeFit {
  double slope_db_per_km = 0.0;
  double intercept_db = 0.0;  // display level extrapolated to z = 0
  double r2 = 0.0;
  std::size_t samples = 0;
  double relative_error(double attenuation_db_per_km) const;
};

/// OLS on display dB of background-subtracted counts inside [z_start, z_end].
SlopeFit fit_slope(const Trace& t, double z_start, double z_end, double background_counts = 0.0);

struct DynamicRange {
  double dynamic_range_db = 0.0;
  double noise_floor_db = 0.0;
};

DynamicRange dynamic_range(const Trace& t, const SlopeFit& fit, const NoiseRegion& noise,
                           double percentile = 0.98);

/// Throws AnalysisError("no beat length detected") when no spectral line stands out.
double beat_length(const Trace& t, double z_start, double z_end, double background_counts = 0.0);

struct Separation {
  double display_m = 0.0;
  double optical_m = 0.0;  // air-equivalent inside air regions
  bool resolvable = false;
};

struct Accuracy {
  double mean_m = 0.0;
  double std_m = 0.0;
  std::size_t n = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> distances_m;
};

struct Options {
  std::optional<Window> fit_window_m;
  std::optional<Window> noise_window_m;
  std::vector<Window> air_regions_m;
  double min_prominence_db = kDefaultProminenceDb;
  double resolvable_dip_db = 3.0;
  double noise_percentile = 0.98;
  bool beat_length = true;  // attempted inside the fit window
};

struct Report {
  std::vector<Peak> peaks;
  std::vector<Separation> separations;
  std::optional<double> delta_m;
  std::optional<double> slope_db_per_km;
  std::optional<double> slope_r2;
  std::optional<double> dynamic_range_db;
  std::optional<double> noise_floor_db;
  std::optional<double> beat_length_m;
  std::optional<Accuracy> accuracy;
};

Report analyze(const Trace& t, const Options& opt);

/// Optical separation of two display positions, stretching spans inside air regions by n_g.
double optical_separation(double a, double b, const std::vector<Window>& air, double group_index);

}  // namespace psiotdr::analysis
