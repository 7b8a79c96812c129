#pragma once

// The system under test: an ordered list of fibre segments and discrete
// events, compiled into a reflectivity impulse response versus one-way
// distance. Reflection fractions and the Rayleigh density are expressed
// relative to the photons launched per pulse.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace psiotdr::link {

inline constexpr double kDefaultBackscatterDb = -82.0;  // 1 ns reference pulse
inline constexpr double kReferencePulse = 1e-9;

struct FiberSegment {
  double length_m = 0.0;
  double attenuation_db_per_km = 0.2;  // one-way
  double group_index = 1.468;
  double backscatter_db = kDefaultBackscatterDb;
  double dispersion_ps_per_nm_km = 17.0;
  std::optional<double> beat_length_m;  // empty: isotropic
  double birefringence_axis_rad = 0.0;

  bool operator==(const FiberSegment&) const = default;
};

struct Reflector {
  double reflectance_db = -14.4;
  bool operator==(const Reflector&) const = default;
};

struct Splice {
  double loss_db = 0.0;
  bool operator==(const Splice&) const = default;
};

/// Free-space section with a reflective surface on each side (e.g. a U-bench).
struct AirGap {
  double length_m = 0.0;
  double surface_reflectance_db = -14.4;
  double coupling_loss_db = 0.0;  // per face, one-way
  bool operator==(const AirGap&) const = default;
};

enum class Termination { Cleaved, Connector, Terminated };

struct FiberEnd {
  Termination termination = Termination::Cleaved;
  std::optional<double> reflectance_db;  // overrides the Fresnel default
  bool operator==(const FiberEnd&) const = default;
};

using Element = std::variant<FiberSegment, Reflector, Splice, AirGap, FiberEnd>;

struct LinkPlan {
  std::vector<Element> elements;
  bool operator==(const LinkPlan&) const = default;
};

class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

private:
  std::vector<std::string> issues_;
};

/// Every invariant violation in the plan, each prefixed with "elements[i]".
std::vector<std::string> validate(const LinkPlan& plan);

/// Continuous backscatter over one uniform fibre segment.
struct RayleighSection {
  double z_begin = 0.0;          // one-way physical distance, m
  double z_end = 0.0;
  double t_begin = 0.0;          // round-trip time at z_begin, s
  double group_index = 1.468;
  double density_begin = 0.0;    // returned fraction per metre at z_begin
  double decay_per_m = 0.0;      // power decay rate of the returned signal
  std::size_t element = 0;       // index into LinkPlan::elements

  double density(double z) const;
  double time_at(double z) const;
  /// Returned fraction integrated over [a, b] (clamped to the section).
  double integral(double a, double b) const;
  double integral() const { return integral(z_begin, z_end); }
};

struct Reflection {
  double z = 0.0;
  double t = 0.0;                // round-trip time, s
  double fraction = 0.0;         // returned photons per launched photon
  double local_group_index = 1.0;
  std::size_t element = 0;
};

struct ImpulseResponse {
  std::vector<RayleighSection> rayleigh;
  std::vector<Reflection> reflections;
  double total_length_m = 0.0;
  double total_round_trip_s = 0.0;

  double rayleigh_density(double z) const;
};

/// pulse_width_s scales the Rayleigh density linearly (reference 1 ns).
ImpulseResponse compile(const LinkPlan& plan, double pulse_width_s);

/// Normal-incidence Fresnel power reflectance between indices n1 and n2.
double fresnel_reflectance(double n1, double n2);

double round_trip_time(const LinkPlan& plan);
double max_repetition_rate(const LinkPlan& plan, double guard_s);

/// Default returned reflectance (linear) of a termination at a fibre of index n.
double termination_reflectance(const FiberEnd& end, double n);

}  // namespace psiotdr::link
