#pragma once

// Probe pulse model, chromatic-dispersion broadening along the link and
// polarisation evolution (Jones calculus) for polarisation-sensitive traces.

#include <complex>
#include <vector>

#include "core/link_model.hpp"

namespace psiotdr::photonics {

using Complex = std::complex<double>;

struct PulseSource {
  double wavelength_m = 1551e-9;
  double fwhm_s = 30e-12;
  double peak_power_w = 1e-3;
  double trigger_jitter_rms_s = 0.0;
  double spectral_width_m = 0.0;       // source linewidth; floor is the transform limit
  double polarization_angle_rad = 0.0;  // launch state (linear) when not scrambled

  bool operator==(const PulseSource&) const = default;

  /// Energy of a Gaussian pulse: P_peak * fwhm * sqrt(pi / (4 ln 2)).
  double energy_j() const;
  double photons_per_pulse() const;
  /// Spectral FWHM of a transform-limited Gaussian pulse of this duration.
  double transform_limited_width_m() const;
  double effective_spectral_width_m() const;
};

enum class DispersionModel { TransformLimited, SourceLinewidth };

/// beta2 (s^2/m) from D (ps/(nm*km)): -D*lambda^2 / (2*pi*c).
double beta2_from_dispersion(double dispersion_ps_per_nm_km, double wavelength_m);

/// L_D = T0^2 / |beta2| with T0 = fwhm / (2 sqrt(ln 2)).
double dispersion_length(double fwhm_s, double beta2_s2_per_m);

/// Dispersion accumulated over the round trip to z, signed.
struct AccumulatedDispersion {
  double beta2_length = 0.0;  // sum beta2_i * 2 L_i, s^2
  double d_length = 0.0;      // sum D_i * 2 L_i, s/m
};

double broadened_fwhm(const PulseSource& source, const AccumulatedDispersion& acc,
                      DispersionModel model);

struct JonesState {
  Complex x{1.0, 0.0};
  Complex y{0.0, 0.0};

  static JonesState linear(double angle_rad);
  /// Point on the Poincare sphere: polar angle theta in [0, pi], azimuth phi.
  static JonesState from_sphere(double theta, double phi);
  double norm() const;
};

struct JonesMatrix {
  Complex a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};

  static JonesMatrix identity() { return {}; }
  JonesMatrix transpose() const { return {a, c, b, d}; }
  JonesState apply(const JonesState& s) const { return {a * s.x + b * s.y, c * s.x + d * s.y}; }
};

JonesMatrix operator*(const JonesMatrix& l, const JonesMatrix& r);

/// Linear birefringence over `length` with retardance 2*pi*length/beat_length
/// about an axis at `axis_rad`.
JonesMatrix linear_retarder(double length_m, double beat_length_m, double axis_rad);

/// |analyzer^H * M * input|^2 for unit-norm states.
double projected_power(const JonesState& analyzer, const JonesMatrix& m, const JonesState& input);

/// Precomputed cumulative per-element quantities for fast lookups at any z.
class LinkPath {
public:
  LinkPath(const link::LinkPlan& plan, double wavelength_m);

  double length() const { return total_length_; }
  AccumulatedDispersion dispersion_at(double z) const;
  JonesMatrix forward_jones(double z) const;
  /// Round-trip operator J(z)^T * J(z) in the fixed laboratory frame.
  JonesMatrix round_trip_jones(double z) const;
  bool birefringent() const { return birefringent_; }

private:
  struct Node {
    double z_begin = 0.0;
    double length = 0.0;
    bool fiber = false;
    double beta2 = 0.0;
    double dispersion = 0.0;  // s/m^2
    double beat_length = 0.0; // 0: isotropic
    double axis = 0.0;
    AccumulatedDispersion acc_begin;
    JonesMatrix jones_begin;
  };
  const Node& node_at(double z) const;

  std::vector<Node> nodes_;
  double total_length_ = 0.0;
  bool birefringent_ = false;
};

/// FWHM of the probe after a round trip to z.
double dispersion_broadened_fwhm(const PulseSource& source, const link::LinkPlan& plan, double z,
                                 DispersionModel model = DispersionModel::SourceLinewidth);

JonesState propagate_jones(const JonesState& state, const link::LinkPlan& plan, double z);
JonesMatrix backscatter_jones(const link::LinkPlan& plan, double z);

}  // namespace psiotdr::photonics
