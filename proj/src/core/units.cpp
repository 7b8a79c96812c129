#include "core/units.hpp"

#include <cmath>
#include <string>

namespace psiotdr::units {

GroupIndex::GroupIndex(double n) : value(n) {
  if (!(n > 1.0) || !std::isfinite(n))
    throw DomainError("group index must be > 1, got " + std::to_string(n));
}

double time_to_distance(double round_trip_s, GroupIndex ctx) {
  if (!(round_trip_s >= 0.0))
    throw DomainError("round-trip time must be >= 0");
  return kSpeedOfLight / ctx.value * round_trip_s / 2.0;
}

double distance_to_time(double distance_m, GroupIndex ctx) {
  if (!(distance_m >= 0.0))
    throw DomainError("distance must be >= 0");
  return 2.0 * distance_m * ctx.value / kSpeedOfLight;
}

double quadrature_width(std::span<const double> widths) {
  // hypot-style accumulation keeps tiny and huge widths well conditioned
  double acc = 0.0;
  for (double w : widths) {
    if (!(w >= 0.0))
      throw DomainError("widths must be >= 0");
    acc = std::hypot(acc, w);
  }
  return acc;
}

double quadrature_width(std::initializer_list<double> widths) {
  return quadrature_width(std::span<const double>(widths.begin(), widths.size()));
}

double gaussian_fwhm_rms(double width, WidthConversion direction) {
  if (!(width >= 0.0))
    throw DomainError("width must be >= 0");
  return direction == WidthConversion::FwhmToRms ? width / kFwhmPerRms : width * kFwhmPerRms;
}

double to_db(double linear) {
  if (!(linear > 0.0))
    throw DomainError("dB of a non-positive ratio");
  return 10.0 * std::log10(linear);
}

double from_db(double db) { return std::pow(10.0, db / 10.0); }

double photon_energy(double wavelength_m) {
  if (!(wavelength_m > 0.0))
    throw DomainError("wavelength must be > 0");
  return kPlanck * kSpeedOfLight / wavelength_m;
}

}  // namespace psiotdr::units
