// Built-in scenarios. Values marked calibrated were fitted so that the
// simulated figures of merit land on the reference measurements; everything
// else is a nominal component value.

#include <cmath>
#include <functional>
#include <map>

#include "core/scenario.hpp"
#include "core/units.hpp"

namespace psiotdr::scenario {

namespace {

constexpr double kPi = 3.14159265358979323846;

// TAC bin whose display width is exactly `metres` at the default group index
double bin_for(double metres) { return units::distance_to_time(metres); }

link::FiberSegment smf(double length_m) {
  link::FiberSegment f;
  f.length_m = length_m;
  return f;
}

link::FiberSegment dsf(double length_m) {
  link::FiberSegment f = smf(length_m);
  f.dispersion_ps_per_nm_km = 0.0;
  return f;
}

link::FiberEnd end(link::Termination t) { return {t, std::nullopt}; }

Scenario base(const std::string& name, const std::string& description) {
  Scenario s;
  s.name = name;
  s.description = description;
  s.seed = 20240601;
  s.setup.source.wavelength_m = 1551e-9;
  s.setup.source.trigger_jitter_rms_s = 85e-12;
  s.calibrated.insert("/source/peak_power_w");
  return s;
}

// full period after the delay: the window runs until the next pulse
double window_to_next_pulse(const Scenario& s) {
  return 1.0 / link::max_repetition_rate(s.setup.plan, s.setup.guard_s) - s.setup.tac.start_delay_s;
}

Scenario artefact1() {
  Scenario s = base("artefact1-config1",
                    "3 cm free-space U-bench between two fibre pigtails, configuration 1 "
                    "(optical start from a second detector), 30 ps source, 1 mm sampling");
  link::AirGap gap;
  gap.length_m = 0.03;
  gap.surface_reflectance_db = units::to_db(link::fresnel_reflectance(units::kDefaultGroupIndex, 1.0));
  gap.coupling_loss_db = 1.0;
  s.setup.plan.elements = {smf(2.0), gap, smf(1.0), end(link::Termination::Terminated)};
  s.calibrated.insert("/link/elements/1/coupling_loss_db");

  s.setup.source.fwhm_s = 30e-12;
  s.setup.source.peak_power_w = 2.37e-7;
  s.setup.source.trigger_jitter_rms_s = 0.0;
  s.setup.start = detection::DetectorModel{};
  s.setup.tac.mode = detection::TacMode::Configuration1;
  s.setup.tac.bin_width_s = bin_for(1e-3);
  s.setup.tac.range_s = bin_for(3.0);
  s.setup.tac.extra_jitter_fwhm_s = 87e-12;
  s.calibrated.insert("/tac/extra_jitter_fwhm_s");
  s.shots = 7'000'000;
  s.analysis.air_regions_m = {{1.99, 2.03}};
  return s;
}

Scenario artefact2(const std::string& suffix, link::FiberSegment lead, double peak_power_w,
                   const std::string& what) {
  Scenario s = base("artefact2-config2-" + suffix,
                    "connector and cleaved end 4.17 cm apart behind " + what +
                        ", configuration 2 (electrical start), 30 ps source, 1 mm sampling");
  const double lead_m = lead.length_m;
  s.setup.plan.elements = {lead, link::Reflector{-22.7}, smf(0.0417), end(link::Termination::Cleaved)};
  s.calibrated.insert("/link/elements/1/reflectance_db");
  s.setup.source.fwhm_s = 30e-12;
  s.setup.source.peak_power_w = peak_power_w;
  s.setup.source.spectral_width_m = 0.25e-9;
  s.calibrated.insert("/source/spectral_width_m");
  s.calibrated.insert("/source/trigger_jitter_rms_s");
  s.setup.tac.bin_width_s = bin_for(1e-3);
  s.setup.tac.start_delay_s = bin_for(lead_m - 0.5);
  s.setup.tac.range_s = bin_for(1.0);
  s.shots = 1'000'000;
  return s;
}

Scenario fiber16km(bool potdr) {
  Scenario s = base(potdr ? "fiber16km-potdr" : "fiber16km-otdr",
                    potdr ? "16 km standard fibre, polarisation-sensitive receiver, scrambler off (P-OTDR)"
                          : "16 km standard fibre, polarisation scrambler on (OTDR)");
  link::FiberSegment f = smf(16000.0);
  f.beat_length_m = 100.0;
  s.setup.plan.elements = {f, end(link::Termination::Terminated)};
  s.setup.source.fwhm_s = 50e-9;
  s.setup.source.peak_power_w = 1.867e-7;
  s.setup.source.polarization_angle_rad = kPi / 8;
  s.setup.stop.analyzer_angle_rad = kPi / 8;
  s.setup.scrambler = !potdr;
  s.setup.tac.bin_width_s = 50e-9;
  s.setup.tac.range_s = window_to_next_pulse(s);
  s.duration_s = 1800.0;
  s.analysis.fit_window_m = analysis::Window{500.0, 15500.0};
  s.analysis.noise_window_m = analysis::Window{16300.0, 17000.0};
  return s;
}

Scenario pigtail() {
  Scenario s = base("pigtail2.3m-accuracy",
                    "2.265 m pigtail between a connector and a cleaved end, configuration 2, 1 mm sampling");
  s.setup.plan.elements = {smf(1.0), link::Reflector{units::to_db(link::fresnel_reflectance(units::kDefaultGroupIndex, 1.0))},
                           smf(2.265), end(link::Termination::Cleaved)};
  s.setup.source.fwhm_s = 30e-12;
  s.setup.source.peak_power_w = 1.39e-7;
  s.calibrated.insert("/source/trigger_jitter_rms_s");
  s.setup.tac.bin_width_s = bin_for(1e-3);
  s.setup.tac.start_delay_s = bin_for(0.5);
  s.setup.tac.range_s = bin_for(3.3);
  s.shots = 100'000;
  return s;
}

Scenario dynamic_range(bool long_run) {
  Scenario s = base(long_run ? "dynamic-range-50km-30min" : "dynamic-range-50km-3min",
                    std::string("50 km standard fibre, 50 ns pulses and bins, ") +
                        (long_run ? "30 minute" : "3 minute") + " acquisition starting at 25 km");
  s.setup.plan.elements = {smf(50000.0), end(link::Termination::Terminated)};
  s.setup.source.fwhm_s = 50e-9;
  s.setup.source.peak_power_w = 2.5e-7;
  s.setup.tac.bin_width_s = 50e-9;
  s.setup.tac.start_delay_s = bin_for(25000.0);
  s.setup.tac.range_s = window_to_next_pulse(s);
  s.duration_s = long_run ? 1800.0 : 180.0;
  s.analysis.fit_window_m = analysis::Window{26000.0, 48000.0};
  s.analysis.noise_window_m = analysis::Window{50300.0, 51000.0};
  return s;
}

Scenario coarse() {
  Scenario s = base("coarse-reflector-50ns", "-30 dB reflector at 1 km, 50 ns pulses and 50 ns bins");
  s.setup.plan.elements = {smf(1000.0), link::Reflector{-30.0}, smf(200.0), end(link::Termination::Terminated)};
  s.setup.source.fwhm_s = 50e-9;
  s.setup.source.peak_power_w = 1.5e-8;
  s.setup.tac.bin_width_s = 50e-9;
  s.setup.tac.range_s = window_to_next_pulse(s);
  s.shots = 1'000'000;
  return s;
}

Scenario beat10m() {
  Scenario s = base("potdr-beatlength-10m",
                    "400 m fibre with uniform 10 m beat length, 1 ns pulses, 0.2 m sampling, scrambler off");
  link::FiberSegment f = smf(400.0);
  f.beat_length_m = 10.0;
  s.setup.plan.elements = {f, end(link::Termination::Terminated)};
  s.setup.source.fwhm_s = 1e-9;
  s.setup.source.peak_power_w = 2.4e-4;
  s.setup.source.polarization_angle_rad = kPi / 6;
  s.setup.stop.analyzer_angle_rad = kPi / 6;
  s.setup.scrambler = false;
  s.setup.tac.bin_width_s = bin_for(0.2);
  s.setup.tac.range_s = bin_for(420.0);
  s.shots = 2'000'000;
  s.analysis.fit_window_m = analysis::Window{20.0, 380.0};
  return s;
}

const std::map<std::string, std::function<Scenario()>>& registry() {
  static const std::map<std::string, std::function<Scenario()>> r = {
      {"artefact1-config1", artefact1},
      {"artefact2-config2-0km", [] { return artefact2("0km", smf(2.0), 2.39e-7, "a 2 m patch cord"); }},
      {"artefact2-config2-20km-dsf", [] { return artefact2("20km-dsf", dsf(20000.0), 1.51e-6, "20 km of dispersion-shifted fibre"); }},
      {"artefact2-config2-50km-smf", [] { return artefact2("50km-smf", smf(50000.0), 2.39e-5, "50 km of standard fibre"); }},
      {"fiber16km-otdr", [] { return fiber16km(false); }},
      {"fiber16km-potdr", [] { return fiber16km(true); }},
      {"pigtail2.3m-accuracy", pigtail},
      {"dynamic-range-50km-3min", [] { return dynamic_range(false); }},
      {"dynamic-range-50km-30min", [] { return dynamic_range(true); }},
      {"coarse-reflector-50ns", coarse},
      {"potdr-beatlength-10m", beat10m},
  };
  return r;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

Scenario preset(const std::string& name) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end()) {
    std::string known;
    for (const auto& [k, v] : r) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError({"unknown preset '" + name + "' (known: " + known + ")"});
  }
  return it->second();
}

}  // namespace psiotdr::scenario
