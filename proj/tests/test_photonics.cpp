#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "core/photonics.hpp"
#include "core/units.hpp"

using namespace psiotdr;
using namespace psiotdr::photonics;
using doctest::Approx;

namespace {

link::FiberSegment fiber(double length, double d = 17.0) {
  link::FiberSegment f;
  f.length_m = length;
  f.dispersion_ps_per_nm_km = d;
  return f;
}

link::FiberSegment birefringent(double length, double lb, double axis = 0.0) {
  auto f = fiber(length);
  f.beat_length_m = lb;
  f.birefringence_axis_rad = axis;
  return f;
}

JonesState random_state(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return JonesState::from_sphere(std::acos(1 - 2 * u(g)), 2 * std::numbers::pi * u(g));
}

}  // namespace

TEST_CASE("dispersion constants for 30 ps at 1551 nm") {
  const double b2 = beta2_from_dispersion(17.0, 1551e-9);
  CHECK(b2 * 1e24 * 1e3 == Approx(-21.7).epsilon(5e-3));  // ps^2/km
  CHECK(30e-12 / (2 * std::sqrt(std::log(2.0))) * 1e12 == Approx(18.0).epsilon(5e-3));
  CHECK(dispersion_length(30e-12, b2) / 1e3 == Approx(15.0).epsilon(0.01));
}

TEST_CASE("no broadening at z = 0 or on dispersion-shifted fibre") {
  PulseSource src;
  src.spectral_width_m = 0.25e-9;
  link::LinkPlan smf{{fiber(50000.0)}};
  link::LinkPlan dsf{{fiber(20000.0, 0.0)}};
  for (auto model : {DispersionModel::TransformLimited, DispersionModel::SourceLinewidth}) {
    CHECK(dispersion_broadened_fwhm(src, smf, 0.0, model) == src.fwhm_s);
    CHECK(dispersion_broadened_fwhm(src, dsf, 20000.0, model) == Approx(src.fwhm_s).epsilon(1e-12));
  }
}

TEST_CASE("source linewidth model with 0.27 nm after 50 km") {
  PulseSource src;
  src.spectral_width_m = 0.27e-9;
  link::LinkPlan smf{{fiber(50000.0)}};
  const double f = dispersion_broadened_fwhm(src, smf, 50000.0);
  const double added = std::sqrt(f * f - src.fwhm_s * src.fwhm_s);
  CHECK(added * 1e12 == Approx(459).epsilon(0.01));
  CHECK(units::time_to_distance(added) * 100 == Approx(4.7).epsilon(0.01));
  CHECK(units::quadrature_width({0.021, units::time_to_distance(added)}) * 100 == Approx(5.1).epsilon(0.02));
}

TEST_CASE("transform-limited model follows the Gaussian law") {
  PulseSource src;
  link::LinkPlan smf{{fiber(100000.0)}};
  const double b2 = beta2_from_dispersion(17.0, src.wavelength_m);
  const double ld = dispersion_length(src.fwhm_s, b2);
  for (double z : {1000.0, 7500.0, 30000.0}) {
    const double zrt = 2 * z;
    const double expect = src.fwhm_s * std::sqrt(1 + (zrt / ld) * (zrt / ld));
    CHECK(dispersion_broadened_fwhm(src, smf, z, DispersionModel::TransformLimited) == Approx(expect).epsilon(1e-9));
  }
  // linewidth below the transform limit is raised to it
  CHECK(src.effective_spectral_width_m() == src.transform_limited_width_m());
}

TEST_CASE("broadening is non-decreasing and quadratic in quadrature") {
  PulseSource src;
  src.spectral_width_m = 0.25e-9;
  link::LinkPlan plan{{fiber(20000.0), fiber(10000.0, 0.0), fiber(30000.0, 4.0)}};
  double prev = 0.0;
  for (double z = 0; z <= 60000.0; z += 250.0) {
    const double f = dispersion_broadened_fwhm(src, plan, z);
    CHECK(f >= prev);
    prev = f;
  }
  link::LinkPlan uniform{{fiber(100000.0)}};
  auto excess = [&](double z) {
    const double f = dispersion_broadened_fwhm(src, uniform, z);
    return f * f - src.fwhm_s * src.fwhm_s;
  };
  for (double z : {1000.0, 12345.0, 40000.0}) CHECK(excess(2 * z) == Approx(4 * excess(z)).epsilon(1e-9));
}

TEST_CASE("jones propagation is unitary") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    link::LinkPlan plan;
    const int segments = 1 + trial % 4;
    double total = 0.0;
    for (int k = 0; k < segments; ++k) {
      const double len = 1 + 200 * u(g);
      total += len;
      if (u(g) < 0.7)
        plan.elements.push_back(birefringent(len, 1 + 50 * u(g), std::numbers::pi * u(g)));
      else
        plan.elements.push_back(fiber(len));
    }
    const auto out = propagate_jones(random_state(g), plan, total * u(g));
    CHECK(std::abs(out.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("isotropic fibre leaves the state alone") {
  link::LinkPlan plan{{fiber(100.0)}};
  const auto in = JonesState::linear(0.3);
  const auto out = propagate_jones(in, plan, 77.0);
  CHECK(std::abs(out.x - in.x) < 1e-15);
  CHECK(std::abs(out.y - in.y) < 1e-15);
}

TEST_CASE("half a beat length is a half-wave plate") {
  const double lb = 10.0;
  link::LinkPlan plan{{birefringent(100.0, lb)}};
  const auto in = JonesState::linear(std::numbers::pi / 4);
  const auto half = propagate_jones(in, plan, lb / 2);
  // retardance pi: components of a 45 degree state end up in antiphase
  const auto phase = std::arg(half.y / half.x);
  CHECK(std::abs(std::abs(phase) - std::numbers::pi) < 1e-9);
  const JonesMatrix id;
  CHECK(projected_power(in, id, half) == Approx(0.0).epsilon(1e-12));
  const auto full = propagate_jones(in, plan, lb);
  CHECK(projected_power(in, id, full) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("an eigenstate only picks up phase") {
  link::LinkPlan plan{{birefringent(100.0, 7.0, 0.4)}};
  const auto in = JonesState::linear(0.4);
  const JonesMatrix id;
  for (double z = 0; z < 100; z += 3.3) CHECK(projected_power(in, id, propagate_jones(in, plan, z)) == Approx(1.0));
}

TEST_CASE("round trip operator") {
  link::LinkPlan plan{{birefringent(100.0, 10.0, 0.2)}};
  const auto j0 = backscatter_jones(plan, 0.0);
  CHECK(std::abs(j0.a - 1.0) < 1e-15);
  CHECK(std::abs(j0.b) < 1e-15);
  CHECK(std::abs(j0.c) < 1e-15);
  CHECK(std::abs(j0.d - 1.0) < 1e-15);

  // brute force: product of many short retarders
  const double z = 37.3;
  JonesMatrix fwd;
  const int steps = 2000;
  for (int i = 0; i < steps; ++i) fwd = linear_retarder(z / steps, 10.0, 0.2) * fwd;
  const auto rt = fwd.transpose() * fwd;
  const auto fast = backscatter_jones(plan, z);
  CHECK(std::abs(rt.a - fast.a) < 1e-9);
  CHECK(std::abs(rt.b - fast.b) < 1e-9);
  CHECK(std::abs(rt.c - fast.c) < 1e-9);
  CHECK(std::abs(rt.d - fast.d) < 1e-9);
}

TEST_CASE("backscattered power oscillates with period L_B / 2") {
  const double lb = 10.0;
  link::LinkPlan plan{{birefringent(400.0, lb)}};
  const auto in = JonesState::linear(std::numbers::pi / 6);
  auto power = [&](double z) { return projected_power(in, backscatter_jones(plan, z), in); };
  for (double z = 0; z < 300; z += 1.7) CHECK(power(z + lb / 2) == Approx(power(z)).epsilon(1e-9));

  // dominant nonzero spatial frequency of a sampled trace, plain DFT
  const double dz = 0.2;
  const int n = 1800;
  std::vector<double> p(n);
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += (p[i] = power(i * dz));
  mean /= n;
  int best = 0;
  double best_power = 0.0;
  for (int k = 1; k < n / 2; ++k) {
    std::complex<double> acc;
    for (int i = 0; i < n; ++i) acc += (p[i] - mean) * std::polar(1.0, -2 * std::numbers::pi * k * i / n);
    if (std::norm(acc) > best_power) {
      best_power = std::norm(acc);
      best = k;
    }
  }
  const double f = best / (n * dz);
  CHECK(std::abs(f - 2 / lb) <= 1.0 / (n * dz));
}

TEST_CASE("scrambled input averages to one half") {
  link::LinkPlan plan{{birefringent(400.0, 10.0)}};
  std::mt19937_64 g(3);
  const auto analyzer = JonesState::linear(0.5);
  for (double z : {0.0, 2.5, 13.1, 250.0}) {
    const auto m = backscatter_jones(plan, z);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += projected_power(analyzer, m, random_state(g));
    CHECK(sum / n == Approx(0.5).epsilon(0.01));
  }
}

TEST_CASE("pulse energy and photon number") {
  PulseSource src;
  src.fwhm_s = 50e-9;
  src.peak_power_w = 1e-3;
  CHECK(src.energy_j() == Approx(1e-3 * 50e-9 * std::sqrt(std::numbers::pi / (4 * std::log(2.0)))));
  CHECK(src.photons_per_pulse() == Approx(src.energy_j() / units::photon_energy(1551e-9)));
  // time-bandwidth product of a Gaussian
  const double c = units::kSpeedOfLight;
  const double dnu = src.transform_limited_width_m() * c / (src.wavelength_m * src.wavelength_m);
  CHECK(dnu * src.fwhm_s == Approx(2 * std::log(2.0) / std::numbers::pi).epsilon(1e-9));
}
