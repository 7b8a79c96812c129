#include "core/link_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "core/units.hpp"

namespace psiotdr::link {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::ostringstream os;
  os << "invalid link plan:";
  for (const auto& i : issues) os << "\n  " << i;
  return os.str();
}

std::string at(std::size_t i) { return "elements[" + std::to_string(i) + "]"; }

double decay_rate_per_m(double attenuation_db_per_km) {
  // returned power falls as 10^(-2*alpha*z/10), alpha in dB/m
  return 2.0 * attenuation_db_per_km / 1000.0 * std::numbers::ln10 / 10.0;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::vector<std::string> validate(const LinkPlan& plan) {
  std::vector<std::string> issues;
  std::optional<std::size_t> end_at;
  for (std::size_t i = 0; i < plan.elements.size(); ++i) {
    if (end_at) issues.push_back(at(i) + ": element after fiber_end at " + at(*end_at));
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, FiberSegment>) {
            if (!(e.length_m >= 0)) issues.push_back(at(i) + ".length_m must be >= 0");
            if (!(e.attenuation_db_per_km >= 0))
              issues.push_back(at(i) + ".attenuation_db_per_km must be >= 0");
            if (!(e.group_index > 1)) issues.push_back(at(i) + ".group_index must be > 1");
            if (!std::isfinite(e.backscatter_db) || e.backscatter_db > 0)
              issues.push_back(at(i) + ".backscatter_db must be finite and <= 0");
            if (!std::isfinite(e.dispersion_ps_per_nm_km))
              issues.push_back(at(i) + ".dispersion_ps_per_nm_km must be finite");
            if (e.beat_length_m && !(*e.beat_length_m > 0))
              issues.push_back(at(i) + ".beat_length_m must be > 0 when present");
          } else if constexpr (std::is_same_v<T, Reflector>) {
            if (!std::isfinite(e.reflectance_db) || e.reflectance_db > 0)
              issues.push_back(at(i) + ".reflectance_db must be finite and <= 0");
          } else if constexpr (std::is_same_v<T, Splice>) {
            if (!(e.loss_db >= 0) || !std::isfinite(e.loss_db))
              issues.push_back(at(i) + ".loss_db must be >= 0");
          } else if constexpr (std::is_same_v<T, AirGap>) {
            if (!(e.length_m >= 0)) issues.push_back(at(i) + ".length_m must be >= 0");
            if (!std::isfinite(e.surface_reflectance_db) || e.surface_reflectance_db > 0)
              issues.push_back(at(i) + ".surface_reflectance_db must be finite and <= 0");
            if (!(e.coupling_loss_db >= 0) || !std::isfinite(e.coupling_loss_db))
              issues.push_back(at(i) + ".coupling_loss_db must be >= 0");
          } else if constexpr (std::is_same_v<T, FiberEnd>) {
            if (e.reflectance_db && (!std::isfinite(*e.reflectance_db) || *e.reflectance_db > 0))
              issues.push_back(at(i) + ".reflectance_db must be finite and <= 0");
            if (!end_at) end_at = i;
          }
        },
        plan.elements[i]);
  }
  return issues;
}

double RayleighSection::density(double z) const {
  if (z < z_begin || z > z_end) return 0.0;
  return density_begin * std::exp(-decay_per_m * (z - z_begin));
}

double RayleighSection::time_at(double z) const {
  return t_begin + 2.0 * (z - z_begin) * group_index / units::kSpeedOfLight;
}

double RayleighSection::integral(double a, double b) const {
  a = std::max(a, z_begin);
  b = std::min(b, z_end);
  if (!(b > a)) return 0.0;
  const double da = a - z_begin, db = b - z_begin;
  if (decay_per_m == 0.0) return density_begin * (db - da);
  return density_begin / decay_per_m *
         (std::exp(-decay_per_m * da) - std::exp(-decay_per_m * db));
}

double ImpulseResponse::rayleigh_density(double z) const {
  double sum = 0.0;
  for (const auto& s : rayleigh) sum += s.density(z);
  return sum;
}

double fresnel_reflectance(double n1, double n2) {
  if (!(n1 > 0) || !(n2 > 0)) throw units::DomainError("refractive indices must be > 0");
  const double r = (n1 - n2) / (n1 + n2);
  return r * r;
}

double termination_reflectance(const FiberEnd& end, double n) {
  if (end.reflectance_db) return units::from_db(*end.reflectance_db);
  switch (end.termination) {
    case Termination::Cleaved:
    case Termination::Connector:
      return fresnel_reflectance(n, 1.0);
    case Termination::Terminated:
      return 0.0;
  }
  return 0.0;
}

ImpulseResponse compile(const LinkPlan& plan, double pulse_width_s) {
  if (auto issues = validate(plan); !issues.empty()) throw ValidationError(std::move(issues));
  if (!(pulse_width_s > 0)) throw units::DomainError("pulse width must be > 0");

  ImpulseResponse ir;
  double z = 0.0, t = 0.0;
  double rt = 1.0;  // cumulative round-trip transmission up to z
  double local_n = units::kDefaultGroupIndex;
  const double width_scale = pulse_width_s / kReferencePulse;

  auto add_reflection = [&](double reflectance, std::size_t i, double n) {
    if (reflectance <= 0.0 || rt <= 0.0) return;
    ir.reflections.push_back({z, t, std::min(1.0, reflectance * rt), n, i});
  };

  for (std::size_t i = 0; i < plan.elements.size(); ++i) {
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, FiberSegment>) {
            local_n = e.group_index;
            if (e.length_m > 0) {
              RayleighSection s;
              s.z_begin = z;
              s.z_end = z + e.length_m;
              s.t_begin = t;
              s.group_index = e.group_index;
              s.density_begin = units::from_db(e.backscatter_db) * width_scale * rt;
              s.decay_per_m = decay_rate_per_m(e.attenuation_db_per_km);
              s.element = i;
              ir.rayleigh.push_back(s);
              rt *= std::exp(-s.decay_per_m * e.length_m);
              z += e.length_m;
              t += 2.0 * e.length_m * e.group_index / units::kSpeedOfLight;
            }
          } else if constexpr (std::is_same_v<T, Reflector>) {
            const double r = units::from_db(e.reflectance_db);
            add_reflection(r, i, local_n);
            rt *= (1.0 - r) * (1.0 - r);
          } else if constexpr (std::is_same_v<T, Splice>) {
            rt *= units::from_db(-2.0 * e.loss_db);
          } else if constexpr (std::is_same_v<T, AirGap>) {
            const double r = units::from_db(e.surface_reflectance_db);
            const double face = (1.0 - r) * units::from_db(-e.coupling_loss_db);
            add_reflection(r, i, local_n);
            rt *= face * face;
            z += e.length_m;
            t += 2.0 * e.length_m / units::kSpeedOfLight;
            add_reflection(r, i, 1.0);
            rt *= face * face;
          } else if constexpr (std::is_same_v<T, FiberEnd>) {
            add_reflection(termination_reflectance(e, local_n), i, local_n);
            rt = 0.0;
          }
        },
        plan.elements[i]);
  }
  ir.total_length_m = z;
  ir.total_round_trip_s = t;
  return ir;
}

double round_trip_time(const LinkPlan& plan) {
  double t = 0.0;
  for (const auto& el : plan.elements) {
    if (const auto* f = std::get_if<FiberSegment>(&el))
      t += 2.0 * f->length_m * f->group_index / units::kSpeedOfLight;
    else if (const auto* g = std::get_if<AirGap>(&el))
      t += 2.0 * g->length_m / units::kSpeedOfLight;
  }
  return t;
}

double max_repetition_rate(const LinkPlan& plan, double guard_s) {
  if (!(guard_s >= 0)) throw units::DomainError("guard must be >= 0");
  const double period = round_trip_time(plan) + guard_s;
  if (!(period > 0)) throw units::DomainError("zero-length plan needs a positive guard");
  return 1.0 / period;
}

}  // namespace psiotdr::link
