#include "core/detection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>

#include "core/rng.hpp"
#include "core/units.hpp"

namespace psiotdr::detection {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kChunk = 1 << 14;

double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double rms(double fwhm) { return fwhm / units::kFwhmPerRms; }

// Adds a Gaussian of the given mass centred at t onto bins of width bw starting at t0.
void deposit(std::vector<double>& bins, double t0, double bw, double t, double sigma, double mass) {
  if (mass <= 0.0) return;
  const double n = static_cast<double>(bins.size());
  if (sigma <= 0.0) {
    const double k = std::floor((t - t0) / bw);
    if (k >= 0 && k < n) bins[static_cast<std::size_t>(k)] += mass;
    return;
  }
  const double lo = std::max(0.0, std::floor((t - 8.5 * sigma - t0) / bw));
  const double hi = std::min(n, std::ceil((t + 8.5 * sigma - t0) / bw));
  if (!(hi > lo)) return;
  double prev = phi((t0 + lo * bw - t) / sigma);
  for (auto k = static_cast<std::size_t>(lo); k < static_cast<std::size_t>(hi); ++k) {
    const double next = phi((t0 + static_cast<double>(k + 1) * bw - t) / sigma);
    bins[k] += mass * (next - prev);
    prev = next;
  }
}

photonics::JonesState launch_state(const Setup& s) {
  return photonics::JonesState::linear(s.source.polarization_angle_rad);
}

}  // namespace

std::size_t TacConfig::bins() const {
  if (!(bin_width_s > 0) || !(range_s > 0)) return 0;
  const double n = std::ceil(range_s / bin_width_s * (1.0 - 1e-12));
  if (!(n < static_cast<double>(kMaxBins) * 4)) return kMaxBins * 4;
  return static_cast<std::size_t>(n);
}

double Setup::repetition_rate() const {
  if (repetition_rate_hz) return *repetition_rate_hz;
  return link::max_repetition_rate(plan, guard_s);
}

double Setup::origin() const {
  return tac.mode == TacMode::Configuration2 ? tac.start_delay_s : 0.0;
}

double Setup::start_jitter_rms() const {
  const double base = tac.mode == TacMode::Configuration1
                          ? (start ? rms(start->jitter_fwhm_s) : 0.0)
                          : source.trigger_jitter_rms_s;
  return std::hypot(base, rms(tac.extra_jitter_fwhm_s));
}

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::vector<std::string> validate(const Setup& s) {
  std::vector<std::string> issues;
  for (const auto& i : link::validate(s.plan)) issues.push_back("link." + i);

  const auto& src = s.source;
  if (!(src.wavelength_m > 0)) issues.push_back("source.wavelength_m must be > 0");
  if (!(src.fwhm_s > 0)) issues.push_back("source.fwhm_s must be > 0");
  if (!(src.peak_power_w >= 0) || !std::isfinite(src.peak_power_w))
    issues.push_back("source.peak_power_w must be >= 0");
  if (!(src.trigger_jitter_rms_s >= 0)) issues.push_back("source.trigger_jitter_rms_s must be >= 0");
  if (!(src.spectral_width_m >= 0)) issues.push_back("source.spectral_width_m must be >= 0");

  auto check_det = [&](const DetectorModel& d, const std::string& p) {
    if (!(d.efficiency > 0 && d.efficiency <= 1)) issues.push_back(p + ".efficiency must be in (0, 1]");
    if (!(d.dark_rate_hz >= 0) || !std::isfinite(d.dark_rate_hz))
      issues.push_back(p + ".dark_rate_hz must be >= 0");
    if (!(d.jitter_fwhm_s >= 0)) issues.push_back(p + ".jitter_fwhm_s must be >= 0");
    if (!(d.dead_time_s >= 0)) issues.push_back(p + ".dead_time_s must be >= 0");
  };
  check_det(s.stop, "stop_detector");
  if (s.start) check_det(*s.start, "start_detector");

  const auto& tac = s.tac;
  if (tac.mode == TacMode::Configuration1) {
    if (!s.start) issues.push_back("start_detector is required in configuration_1");
    if (tac.start_delay_s != 0.0)
      issues.push_back("tac.start_delay_s applies to configuration_2 only");
  } else if (s.start) {
    issues.push_back("start_detector is not allowed in configuration_2");
  }
  bool tac_ok = true;
  if (!(tac.bin_width_s > 0)) {
    issues.push_back("tac.bin_width_s must be > 0");
    tac_ok = false;
  }
  if (!(tac.range_s >= tac.bin_width_s)) {
    issues.push_back("tac.range_s must be >= tac.bin_width_s");
    tac_ok = false;
  }
  if (tac_ok && tac.bins() > kMaxBins)
    issues.push_back("tac.range_s / tac.bin_width_s exceeds 2^26 bins");
  if (!(tac.start_delay_s >= 0)) issues.push_back("tac.start_delay_s must be >= 0");
  if (!(tac.extra_jitter_fwhm_s >= 0)) issues.push_back("tac.extra_jitter_fwhm_s must be >= 0");

  if (!(s.guard_s >= 0)) issues.push_back("guard_s must be >= 0");
  if (issues.empty()) {
    const double max_rate = link::max_repetition_rate(s.plan, s.guard_s);
    if (s.repetition_rate_hz && !(*s.repetition_rate_hz > 0))
      issues.push_back("repetition_rate_hz must be > 0");
    else if (s.repetition_rate_hz && *s.repetition_rate_hz > max_rate * (1 + 1e-12))
      issues.push_back("repetition_rate_hz exceeds the maximum " + std::to_string(max_rate) +
                       " Hz (round trip + guard)");
    else if (s.origin() + tac.range_s > (1.0 / s.repetition_rate()) * (1 + 1e-12))
      issues.push_back("tac.range_s: acquisition window extends past the next pulse");
  }
  return issues;
}

double nep(const DetectorModel& det, double wavelength_m) {
  if (!(det.efficiency > 0)) throw units::DomainError("efficiency must be > 0");
  return units::photon_energy(wavelength_m) / det.efficiency * std::sqrt(2.0 * det.dark_rate_hz);
}

double photon_timing_rms(const Setup& s, const photonics::LinkPath& path, double z) {
  const double pulse = photonics::broadened_fwhm(s.source, path.dispersion_at(z), s.dispersion);
  return rms(std::hypot(pulse, s.stop.jitter_fwhm_s));
}

std::vector<double> first_stop_distribution(std::span<const double> lambda,
                                            std::span<const double> pre) {
  std::vector<double> p(lambda.size());
  double before = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double blind = i < pre.size() ? pre[i] : 0.0;
    p[i] = std::exp(-blind - before) * -std::expm1(-lambda[i]);
    before += lambda[i];
  }
  return p;
}

std::vector<double> first_stop_density(const std::function<double(double)>& rate, double range_s,
                                       std::size_t n) {
  std::vector<double> p(n);
  if (n == 0) return p;
  const double dt = range_s / static_cast<double>(n);
  double cum = 0.0, prev = rate(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = dt * static_cast<double>(i);
    const double r = rate(t);
    if (i > 0) cum += 0.5 * (prev + r) * dt;
    p[i] = r * std::exp(-cum);
    prev = r;
  }
  return p;
}

Oracle::Oracle(const Setup& setup)
    : setup_(setup), ir_(link::compile(setup.plan, setup.source.fwhm_s)),
      path_(setup.plan, setup.source.wavelength_m) {
  scale_ = setup.stop.efficiency * setup.source.photons_per_pulse();
  const std::size_t n = setup.tac.bins();
  const double bw = setup.tac.bin_width_s;
  const double origin = setup.origin();
  const double tau = setup.stop.dead_time_s;

  lambda_.assign(n, 0.0);
  accumulate(lambda_, origin, bw, std::min(bw, sigma_floor()));

  // blinding before the window only needs the integrated intensity, so a coarse grid will do
  pre_.assign(n, 0.0);
  if (tau <= 0.0) return;
  const std::size_t m = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(tau / bw)), 1, 4096);
  const double pbw = tau / static_cast<double>(m);
  std::vector<double> pre_grid(m, 0.0);
  accumulate(pre_grid, origin - tau, pbw, pbw);
  std::vector<double> cum(m + 1, 0.0);  // cum[k]: intensity in [origin - tau + k*pbw, origin)
  for (std::size_t k = m; k-- > 0;) cum[k] = cum[k + 1] + pre_grid[k];
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) * bw / pbw;  // bin start, in pre-grid units past origin - tau
    if (x >= static_cast<double>(m)) break;
    const auto k = static_cast<std::size_t>(std::floor(x));
    pre_[i] = cum[k + 1] + pre_grid[k] * (static_cast<double>(k + 1) - x);
  }
}

double Oracle::sigma_floor() const {
  return std::hypot(rms(std::hypot(setup_.source.fwhm_s, setup_.stop.jitter_fwhm_s)), setup_.start_jitter_rms());
}

void Oracle::accumulate(std::vector<double>& grid, double t0, double bw, double resolution) const {
  const double t1 = t0 + bw * static_cast<double>(grid.size());
  for (auto& g : grid) g += setup_.stop.dark_rate_hz * bw;
  const double sigma_start = setup_.start_jitter_rms();
  auto sigma_at = [&](double z) { return std::hypot(photon_timing_rms(setup_, path_, z), sigma_start); };

  for (const auto& r : ir_.reflections) {
    const double sigma = sigma_at(r.z);
    if (r.t + 10 * sigma < t0 || r.t - 10 * sigma > t1) continue;
    deposit(grid, t0, bw, r.t, sigma, scale_ * r.fraction * polarization_factor(r.z));
  }

  double sigma_max = sigma_floor();
  for (const auto& r : ir_.rayleigh) sigma_max = std::max({sigma_max, sigma_at(r.z_begin), sigma_at(r.z_end)});

  for (const auto& sec : ir_.rayleigh) {
    const double v = units::kSpeedOfLight / sec.group_index / 2.0;  // one-way m per round-trip s
    const double za = std::max(sec.z_begin, sec.z_begin + (t0 - 10 * sigma_max - sec.t_begin) * v);
    const double zb = std::min(sec.z_end, sec.z_begin + (t1 + 10 * sigma_max - sec.t_begin) * v);
    if (!(zb > za)) continue;
    double step = resolution * v / 4.0;
    const auto& fiber = std::get<link::FiberSegment>(setup_.plan.elements[sec.element]);
    if (fiber.beat_length_m && setup_.stop.analyzer_angle_rad && !setup_.scrambler)
      step = std::min(step, *fiber.beat_length_m / 160.0);
    const auto steps = static_cast<std::size_t>(std::ceil((zb - za) / step));
    const double dz = (zb - za) / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      const double a = za + dz * static_cast<double>(k);
      const double mid = a + dz / 2;
      const double mass = scale_ * sec.integral(a, a + dz) * polarization_factor(mid);
      deposit(grid, t0, bw, sec.time_at(mid), sigma_at(mid), mass);
    }
  }
}

double Oracle::polarization_factor(double z) const {
  if (!setup_.stop.analyzer_angle_rad) return 1.0;
  if (setup_.scrambler) return 0.5;
  const auto analyzer = photonics::JonesState::linear(*setup_.stop.analyzer_angle_rad);
  return photonics::projected_power(analyzer, path_.round_trip_jones(z), launch_state(setup_));
}

std::vector<double> Oracle::first_stop_probability() const {
  return first_stop_distribution(lambda_, pre_);
}

double Oracle::per_shot_probability() const {
  const auto p = first_stop_probability();
  return std::accumulate(p.begin(), p.end(), 0.0);
}

double Oracle::rate(double t) const {
  double r = setup_.stop.dark_rate_hz;
  for (const auto& ref : ir_.reflections) {
    const double sigma = photon_timing_rms(setup_, path_, ref.z);
    const double x = (t - ref.t) / sigma;
    if (std::abs(x) > 12) continue;
    r += scale_ * ref.fraction * polarization_factor(ref.z) * std::exp(-0.5 * x * x) /
         (sigma * std::sqrt(2 * std::numbers::pi));
  }
  for (const auto& sec : ir_.rayleigh) {
    const double v = units::kSpeedOfLight / sec.group_index / 2.0;
    const double zc = sec.z_begin + (t - sec.t_begin) * v;
    const double sigma_z = 10 * photon_timing_rms(setup_, path_, std::clamp(zc, sec.z_begin, sec.z_end)) * v;
    const double za = std::max(sec.z_begin, zc - sigma_z), zb = std::min(sec.z_end, zc + sigma_z);
    if (!(zb > za)) continue;
    constexpr int kSteps = 400;
    const double dz = (zb - za) / kSteps;
    for (int k = 0; k < kSteps; ++k) {
      const double z = za + dz * (k + 0.5);
      const double sigma = photon_timing_rms(setup_, path_, z);
      const double x = (t - sec.time_at(z)) / sigma;
      r += scale_ * sec.density(z) * dz * polarization_factor(z) * std::exp(-0.5 * x * x) /
           (sigma * std::sqrt(2 * std::numbers::pi));
    }
  }
  return r;
}

namespace {

struct Component {
  bool reflection = false;
  double z = 0.0, t = 0.0, sigma = 0.0;  // reflections
  const link::RayleighSection* section = nullptr;
  photonics::JonesMatrix round_trip;
};

class Engine {
public:
  explicit Engine(const Setup& s)
      : s_(s), ir_(link::compile(s.plan, s.source.fwhm_s)), path_(s.plan, s.source.wavelength_m) {
    const double scale = s.stop.efficiency * s.source.photons_per_pulse();
    double acc = 0.0;
    for (const auto& r : ir_.reflections) {
      Component c;
      c.reflection = true;
      c.z = r.z;
      c.t = r.t;
      c.sigma = photon_timing_rms(s, path_, r.z);
      c.round_trip = path_.round_trip_jones(r.z);
      acc += r.fraction;
      comps_.push_back(c);
      cum_.push_back(acc);
    }
    for (const auto& sec : ir_.rayleigh) {
      Component c;
      c.section = &sec;
      acc += sec.integral();
      comps_.push_back(c);
      cum_.push_back(acc);
    }
    mean_ = scale * acc;
    bins_ = s.tac.bins();
    if (s.stop.analyzer_angle_rad) analyzer_ = photonics::JonesState::linear(*s.stop.analyzer_angle_rad);
    launch_ = launch_state(s);
    sigma_start_ = s.start_jitter_rms();
  }

  std::size_t bins() const { return bins_; }

  void run_shot(std::uint64_t seed, std::uint64_t shot, std::vector<std::uint64_t>& counts,
                std::vector<double>& arrivals) const {
    rng::ShotStream rs(seed, shot);
    const double ts = s_.origin() + sigma_start_ * rs.normal();
    photonics::JonesState input = launch_;

    arrivals.clear();
    const std::uint64_t n = rs.poisson(mean_);
    const double total = cum_.empty() ? 0.0 : cum_.back();
    for (std::uint64_t k = 0; k < n; ++k) {
      const double pick = rs.uniform() * total;
      auto idx = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), pick) - cum_.begin());
      idx = std::min(idx, comps_.size() - 1);
      const Component& c = comps_[idx];
      double z, t, sigma;
      const photonics::JonesMatrix* rt = &c.round_trip;
      photonics::JonesMatrix local;
      if (c.reflection) {
        z = c.z;
        t = c.t;
        sigma = c.sigma;
      } else {
        const auto& sec = *c.section;
        const double u = rs.uniform();
        const double len = sec.z_end - sec.z_begin;
        if (sec.decay_per_m > 0.0)
          z = sec.z_begin - std::log1p(u * std::expm1(-sec.decay_per_m * len)) / sec.decay_per_m;
        else
          z = sec.z_begin + u * len;
        z = std::min(z, sec.z_end);
        t = sec.time_at(z);
        sigma = photon_timing_rms(s_, path_, z);
        if (analyzer_ && path_.birefringent()) {
          local = path_.round_trip_jones(z);
          rt = &local;
        } else {
          rt = nullptr;
        }
      }
      const double arrival = t + sigma * rs.normal();
      if (analyzer_) {
        // the scrambler decorrelates the state between returned photons (depolarised on average)
        if (s_.scrambler) {
          const double u = rs.uniform(), v = rs.uniform();
          input = photonics::JonesState::from_sphere(std::acos(1.0 - 2.0 * u), 2.0 * std::numbers::pi * v);
        }
        const double keep = rt ? photonics::projected_power(*analyzer_, *rt, input)
                               : photonics::projected_power(*analyzer_, photonics::JonesMatrix{}, input);
        if (rs.uniform() >= keep) continue;
      }
      arrivals.push_back(arrival);
    }

    const double dark = s_.stop.dark_rate_hz;
    const double tau = s_.stop.dead_time_s;
    // last event before the window start decides how long the detector stays blind
    double last = ts - rs.exponential(dark);
    const double forward = rs.exponential(dark);
    for (double a : arrivals)
      if (a < ts) last = std::max(last, a);
    const double ready = (last >= ts - tau) ? std::max(ts, last + tau) : ts;
    double stop = ready + forward;
    for (double a : arrivals)
      if (a >= ready) stop = std::min(stop, a);

    const double bw = s_.tac.bin_width_s;
    const double idx = std::floor((stop - ts) / bw);
    if (idx >= 0 && idx < static_cast<double>(bins_)) ++counts[static_cast<std::size_t>(idx)];
  }

private:
  const Setup& s_;
  link::ImpulseResponse ir_;
  photonics::LinkPath path_;
  std::vector<Component> comps_;
  std::vector<double> cum_;
  double mean_ = 0.0;
  std::size_t bins_ = 0;
  std::optional<photonics::JonesState> analyzer_;
  photonics::JonesState launch_;
  double sigma_start_ = 0.0;
};

}  // namespace

Histogram simulate(const Setup& setup, std::uint64_t shots, std::uint64_t seed, unsigned threads) {
  std::vector<std::string> issues;
  if (shots < 1) issues.push_back("shots must be >= 1");
  for (auto& i : validate(setup)) issues.push_back(std::move(i));
  if (!issues.empty()) throw link::ValidationError(std::move(issues));

  const Engine engine(setup);
  Histogram h;
  h.bin_width_s = setup.tac.bin_width_s;
  h.origin_s = setup.origin();
  h.shots = shots;
  h.seed = seed;
  h.counts.assign(engine.bins(), 0);

  const std::uint64_t chunks = (shots + kChunk - 1) / kChunk;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));

  std::atomic<std::uint64_t> next{0};
  std::vector<std::vector<std::uint64_t>> partial(threads);
  auto work = [&](unsigned w) {
    auto& counts = partial[w];
    counts.assign(engine.bins(), 0);
    std::vector<double> arrivals;
    for (std::uint64_t c; (c = next.fetch_add(1)) < chunks;) {
      const std::uint64_t end = std::min(shots, (c + 1) * kChunk);
      for (std::uint64_t shot = c * kChunk; shot < end; ++shot) engine.run_shot(seed, shot, counts, arrivals);
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  for (const auto& p : partial)
    for (std::size_t i = 0; i < p.size(); ++i) h.counts[i] += p[i];
  return h;
}

}  // namespace psiotdr::detection
