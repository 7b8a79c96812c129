#include "core/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "core/units.hpp"

namespace psiotdr::photonics {

namespace {

// 2*sqrt(ln 2): FWHM over 1/e half-width of a Gaussian intensity profile
const double kFwhmPerT0 = 2.0 * std::sqrt(std::numbers::ln2);
// time-bandwidth product of a transform-limited Gaussian (FWHM * FWHM)
const double kGaussianTbp = 2.0 * std::numbers::ln2 / std::numbers::pi;

double dispersion_si(double ps_per_nm_km) { return ps_per_nm_km * 1e-6; }  // s/m^2

}  // namespace

double PulseSource::energy_j() const {
  return peak_power_w * fwhm_s * std::sqrt(std::numbers::pi / (4.0 * std::numbers::ln2));
}

double PulseSource::photons_per_pulse() const {
  return energy_j() / units::photon_energy(wavelength_m);
}

double PulseSource::transform_limited_width_m() const {
  const double dnu = kGaussianTbp / fwhm_s;
  return wavelength_m * wavelength_m * dnu / units::kSpeedOfLight;
}

double PulseSource::effective_spectral_width_m() const {
  return std::max(spectral_width_m, transform_limited_width_m());
}

double beta2_from_dispersion(double dispersion_ps_per_nm_km, double wavelength_m) {
  return -dispersion_si(dispersion_ps_per_nm_km) * wavelength_m * wavelength_m /
         (2.0 * std::numbers::pi * units::kSpeedOfLight);
}

double dispersion_length(double fwhm_s, double beta2_s2_per_m) {
  const double t0 = fwhm_s / kFwhmPerT0;
  if (beta2_s2_per_m == 0.0) return std::numeric_limits<double>::infinity();
  return t0 * t0 / std::abs(beta2_s2_per_m);
}

double broadened_fwhm(const PulseSource& source, const AccumulatedDispersion& acc,
                      DispersionModel model) {
  if (model == DispersionModel::TransformLimited) {
    const double t0 = source.fwhm_s / kFwhmPerT0;
    const double ratio = acc.beta2_length / (t0 * t0);
    return source.fwhm_s * std::sqrt(1.0 + ratio * ratio);
  }
  const double added = std::abs(acc.d_length) * source.effective_spectral_width_m();
  return std::hypot(source.fwhm_s, added);
}

JonesState JonesState::linear(double angle_rad) {
  return {Complex(std::cos(angle_rad), 0.0), Complex(std::sin(angle_rad), 0.0)};
}

JonesState JonesState::from_sphere(double theta, double phi) {
  return {Complex(std::cos(theta / 2), 0.0), std::polar(std::sin(theta / 2), phi)};
}

double JonesState::norm() const { return std::sqrt(std::norm(x) + std::norm(y)); }

JonesMatrix operator*(const JonesMatrix& l, const JonesMatrix& r) {
  return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
          l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
}

JonesMatrix linear_retarder(double length_m, double beat_length_m, double axis_rad) {
  const double delta = 2.0 * std::numbers::pi * length_m / beat_length_m;
  const Complex e_fast = std::polar(1.0, -delta / 2), e_slow = std::polar(1.0, delta / 2);
  const double c = std::cos(axis_rad), s = std::sin(axis_rad);
  // R(theta)^T * diag(e_fast, e_slow) * R(theta), R = [[c, s], [-s, c]]
  return {c * c * e_fast + s * s * e_slow, c * s * (e_fast - e_slow),
          c * s * (e_fast - e_slow), s * s * e_fast + c * c * e_slow};
}

double projected_power(const JonesState& analyzer, const JonesMatrix& m, const JonesState& input) {
  const JonesState out = m.apply(input);
  return std::norm(std::conj(analyzer.x) * out.x + std::conj(analyzer.y) * out.y);
}

LinkPath::LinkPath(const link::LinkPlan& plan, double wavelength_m) {
  double z = 0.0;
  AccumulatedDispersion acc;
  JonesMatrix jones;
  for (const auto& el : plan.elements) {
    Node n;
    n.z_begin = z;
    n.acc_begin = acc;
    n.jones_begin = jones;
    if (const auto* f = std::get_if<link::FiberSegment>(&el)) {
      n.fiber = true;
      n.length = f->length_m;
      n.dispersion = dispersion_si(f->dispersion_ps_per_nm_km);
      n.beta2 = beta2_from_dispersion(f->dispersion_ps_per_nm_km, wavelength_m);
      if (f->beat_length_m) {
        n.beat_length = *f->beat_length_m;
        n.axis = f->birefringence_axis_rad;
        birefringent_ = true;
        jones = linear_retarder(n.length, n.beat_length, n.axis) * jones;
      }
      acc.beta2_length += n.beta2 * 2.0 * n.length;
      acc.d_length += n.dispersion * 2.0 * n.length;
    } else if (const auto* g = std::get_if<link::AirGap>(&el)) {
      n.length = g->length_m;
    }
    z += n.length;
    nodes_.push_back(n);
  }
  total_length_ = z;
}

const LinkPath::Node& LinkPath::node_at(double z) const {
  static const Node empty;
  if (nodes_.empty()) return empty;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), z,
                             [](double v, const Node& n) { return v < n.z_begin; });
  if (it == nodes_.begin()) return nodes_.front();
  --it;
  // prefer the last node with positive length covering z
  while (it != nodes_.begin() && it->length == 0.0 && std::prev(it)->z_begin == it->z_begin &&
         std::prev(it)->length > 0.0 && z < std::prev(it)->z_begin + std::prev(it)->length)
    --it;
  return *it;
}

AccumulatedDispersion LinkPath::dispersion_at(double z) const {
  const Node& n = node_at(z);
  AccumulatedDispersion acc = n.acc_begin;
  if (n.fiber) {
    const double dz = std::clamp(z - n.z_begin, 0.0, n.length);
    acc.beta2_length += n.beta2 * 2.0 * dz;
    acc.d_length += n.dispersion * 2.0 * dz;
  }
  return acc;
}

JonesMatrix LinkPath::forward_jones(double z) const {
  const Node& n = node_at(z);
  if (n.beat_length <= 0.0) return n.jones_begin;
  const double dz = std::clamp(z - n.z_begin, 0.0, n.length);
  return linear_retarder(dz, n.beat_length, n.axis) * n.jones_begin;
}

JonesMatrix LinkPath::round_trip_jones(double z) const {
  const JonesMatrix j = forward_jones(z);
  return j.transpose() * j;
}

double dispersion_broadened_fwhm(const PulseSource& source, const link::LinkPlan& plan, double z,
                                 DispersionModel model) {
  const LinkPath path(plan, source.wavelength_m);
  return broadened_fwhm(source, path.dispersion_at(z), model);
}

JonesState propagate_jones(const JonesState& state, const link::LinkPlan& plan, double z) {
  const LinkPath path(plan, 1551e-9);
  return path.forward_jones(z).apply(state);
}

JonesMatrix backscatter_jones(const link::LinkPlan& plan, double z) {
  const LinkPath path(plan, 1551e-9);
  return path.round_trip_jones(z);
}

}  // namespace psiotdr::photonics
