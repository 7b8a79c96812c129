#pragma once

// Photon-counting receiver and start/stop TAC chain: a seeded Monte Carlo
// engine (simulate) and the analytic expectation it is checked against
// (Oracle, first_stop_distribution).

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "core/link_model.hpp"
#include "core/photonics.hpp"

namespace psiotdr::detection {

struct DetectorModel {
  double efficiency = 0.008;
  double dark_rate_hz = 2000.0;
  double jitter_fwhm_s = 40e-12;
  double dead_time_s = 1e-6;
  std::optional<double> analyzer_angle_rad;  // linear analyzer; empty = polarisation-insensitive

  bool operator==(const DetectorModel&) const = default;
};

enum class TacMode { Configuration1, Configuration2 };

struct TacConfig {
  TacMode mode = TacMode::Configuration2;
  double bin_width_s = 9.79e-12;
  double range_s = 25e-9;
  double start_delay_s = 0.0;        // delay generator, configuration 2
  double extra_jitter_fwhm_s = 0.0;  // laser driver + TAC electronics

  bool operator==(const TacConfig&) const = default;
  std::size_t bins() const;
};

inline constexpr std::size_t kMaxBins = std::size_t{1} << 26;

/// Everything the engine needs to run one acquisition.
struct Setup {
  link::LinkPlan plan;
  photonics::PulseSource source;
  DetectorModel stop;
  std::optional<DetectorModel> start;  // configuration 1 start channel
  TacConfig tac;
  bool scrambler = true;
  photonics::DispersionModel dispersion = photonics::DispersionModel::SourceLinewidth;
  double guard_s = 10e-6;
  std::optional<double> repetition_rate_hz;  // default: max_repetition_rate

  bool operator==(const Setup&) const = default;

  double repetition_rate() const;
  /// Laser time at which TAC delay 0 falls (histogram origin).
  double origin() const;
  /// rms start-time jitter: start channel (or trigger) plus extra electronics.
  double start_jitter_rms() const;
};

/// Every violation, each prefixed with its scenario path (e.g. "stop_detector.efficiency").
std::vector<std::string> validate(const Setup& setup);

struct Histogram {
  double bin_width_s = 0.0;
  double origin_s = 0.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::string scenario_hash;

  bool operator==(const Histogram&) const = default;
  std::uint64_t total() const;
};

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void write_csv(const Histogram& h, std::ostream& os);
Histogram read_csv(std::istream& is);

/// (h c / lambda / eta) * sqrt(2 D), W/sqrt(Hz).
double nep(const DetectorModel& det, double wavelength_m);

/// Gaussian start-to-stop timing spread for a photon returned from z.
double photon_timing_rms(const Setup& setup, const photonics::LinkPath& path, double z);

class Oracle {
public:
  explicit Oracle(const Setup& setup);

  /// Expected events per shot in each histogram bin, ignoring pile-up and dead time.
  const std::vector<double>& intensity() const { return lambda_; }
  /// Expected events per shot in [t - dead_time, window start) for each bin start t.
  const std::vector<double>& pre_window_blinding() const { return pre_; }
  /// First-stop probability per bin per shot.
  std::vector<double> first_stop_probability() const;
  /// Probability that a shot records a stop at all.
  double per_shot_probability() const;
  /// Instantaneous stop-channel click rate (Hz) at laser time t, start jitter excluded.
  double rate(double t) const;

private:
  Setup setup_;
  link::ImpulseResponse ir_;
  photonics::LinkPath path_;
  double scale_ = 0.0;  // detected photons per unit returned fraction
  std::vector<double> lambda_, pre_;
  double polarization_factor(double z) const;
  double sigma_floor() const;
  void accumulate(std::vector<double>& grid, double t0, double bw, double resolution) const;
};

/// p_i = exp(-pre_i) * exp(-sum_{j<i} lambda_j) * (1 - exp(-lambda_i)).
std::vector<double> first_stop_distribution(std::span<const double> lambda,
                                            std::span<const double> pre_blinding = {});

/// Continuous form for a rate function r(t): p(t) = r(t) exp(-int_0^t r), sampled at n points.
std::vector<double> first_stop_density(const std::function<double(double)>& rate, double range_s,
                                       std::size_t n);

/// shots >= 1. threads = 0 picks the hardware concurrency. Result does not depend on threads.
Histogram simulate(const Setup& setup, std::uint64_t shots, std::uint64_t seed, unsigned threads = 0);

}  // namespace psiotdr::detection
