#pragma once

// Physical constants, time <-> distance conversion, dB arithmetic and
// Gaussian width algebra. Everything is SI: seconds, metres, watts, hertz.

#include <span>
#include <stdexcept>

namespace psiotdr::units {

inline constexpr double kSpeedOfLight = 299792458.0;     // m/s
inline constexpr double kPlanck = 6.62607015e-34;        // J*s
inline constexpr double kDefaultGroupIndex = 1.468;

// 2*sqrt(2*ln 2): ratio of a Gaussian's FWHM to its standard deviation.
inline constexpr double kFwhmPerRms = 2.3548200450309493;

class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Group index used to turn round-trip times into one-way distances.
struct GroupIndex {
  double value = kDefaultGroupIndex;

  constexpr GroupIndex() = default;
  explicit GroupIndex(double n);
};

/// Round-trip time (s) -> one-way distance (m): (c/n_g)*t/2.
double time_to_distance(double round_trip_s, GroupIndex ctx = {});

/// One-way distance (m) -> round-trip time (s).
double distance_to_time(double distance_m, GroupIndex ctx = {});

/// Root-sum-square of independent widths. Empty input gives 0.
double quadrature_width(std::span<const double> widths);
double quadrature_width(std::initializer_list<double> widths);

enum class WidthConversion { FwhmToRms, RmsToFwhm };

double gaussian_fwhm_rms(double width, WidthConversion direction);

inline double fwhm_to_rms(double fwhm) { return gaussian_fwhm_rms(fwhm, WidthConversion::FwhmToRms); }
inline double rms_to_fwhm(double rms) { return gaussian_fwhm_rms(rms, WidthConversion::RmsToFwhm); }

/// 10*log10(x) for a linear power ratio x > 0.
double to_db(double linear);
/// 10^(db/10).
double from_db(double db);

/// Photon energy h*c/lambda (J).
double photon_energy(double wavelength_m);

}  // namespace psiotdr::units
