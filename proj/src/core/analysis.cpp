#include "core/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

namespace psiotdr::analysis {

namespace {

double display(double counts, double offset) { return 5.0 * std::log10(counts) + offset; }

std::vector<double> gaussian_smooth(const std::vector<double>& x, double sigma_bins) {
  if (sigma_bins <= 0.0) return x;
  const auto half = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma_bins));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  for (std::ptrdiff_t k = -half; k <= half; ++k)
    kernel[static_cast<std::size_t>(k + half)] = std::exp(-0.5 * (k / sigma_bins) * (k / sigma_bins));
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> out(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0, norm = 0.0;
    for (std::ptrdiff_t k = std::max(-half, -i); k <= std::min(half, n - 1 - i); ++k) {
      const double w = kernel[static_cast<std::size_t>(k + half)];
      acc += w * x[static_cast<std::size_t>(i + k)];
      norm += w;
    }
    out[static_cast<std::size_t>(i)] = acc / norm;
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  const double hi = *mid;
  return 0.5 * (hi + *std::max_element(v.begin(), mid));
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<double> flank(const std::vector<double>& c, std::ptrdiff_t from, std::ptrdiff_t to) {
  const auto n = static_cast<std::ptrdiff_t>(c.size());
  from = std::max<std::ptrdiff_t>(from, 0);
  to = std::min(to, n - 1);
  std::vector<double> out;
  for (std::ptrdiff_t i = from; i <= to; ++i) out.push_back(c[static_cast<std::size_t>(i)]);
  return out;
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LineFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

// Crossing of `level` between samples j (inside) and k (outside), as a fractional index.
double crossing(const std::vector<double>& y, std::size_t inside, std::size_t outside, double level) {
  const double a = y[inside], b = y[outside];
  const double f = (a == b) ? 0.5 : (a - level) / (a - b);
  return static_cast<double>(inside) + f * (static_cast<double>(outside) - static_cast<double>(inside));
}

struct Candidate {
  std::size_t apex = 0;
  double base = 0.0;
  double smooth_apex = 0.0;
};

Peak measure(const Trace& t, const std::vector<double>& s1, const Candidate& cand) {
  const auto& c = t.corrected;
  const std::size_t n = c.size();
  const double base = cand.base;
  const double amp0 = std::max(cand.smooth_apex - base, 1e-300);

  // core: contiguous bins above half maximum (contiguity judged on the lightly smoothed trace)
  std::size_t lo = cand.apex, hi = cand.apex;
  while (lo > 0 && s1[lo - 1] - base > amp0 / 2) --lo;
  while (hi + 1 < n && s1[hi + 1] - base > amp0 / 2) ++hi;

  // weighted log-parabola: ln(c - base) = a + b x + q x^2, weights ~ counts
  double pos = static_cast<double>(cand.apex);
  double amp = amp0;
  bool fitted = false;
  {
    double s[5] = {}, r[3] = {};
    std::size_t used = 0;
    for (std::size_t j = lo; j <= hi; ++j) {
      const double v = c[j] - base;
      if (v <= 0) continue;
      const double x = static_cast<double>(j) - static_cast<double>(cand.apex);
      const double y = std::log(v);
      double xp = 1.0;
      for (int p = 0; p < 5; ++p, xp *= x) s[p] += v * xp;
      r[0] += v * y;
      r[1] += v * x * y;
      r[2] += v * x * x * y;
      ++used;
    }
    if (used >= 3) {
      // solve the 3x3 normal equations by Cramer's rule
      const double m[3][3] = {{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
      auto det3 = [](const double a[3][3]) {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
               a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
      };
      const double d = det3(m);
      if (std::abs(d) > 0) {
        double coef[3];
        for (int col = 0; col < 3; ++col) {
          double mm[3][3];
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) mm[i][j] = (j == col) ? r[i] : m[i][j];
          coef[col] = det3(mm) / d;
        }
        if (coef[2] < 0) {
          const double v = -coef[1] / (2 * coef[2]);
          const double span = static_cast<double>(hi - lo) / 2 + 1;
          if (std::abs(v) <= span) {
            pos = static_cast<double>(cand.apex) + v;
            amp = std::exp(coef[0] - coef[1] * coef[1] / (4 * coef[2]));
            fitted = true;
          }
        }
      }
    }
  }
  if (!fitted && cand.apex > 0 && cand.apex + 1 < n) {
    const double l = s1[cand.apex - 1] - base, m0 = s1[cand.apex] - base, r = s1[cand.apex + 1] - base;
    if (l > 0 && m0 > 0 && r > 0) {
      const double a = std::log(l), b = std::log(m0), d = std::log(r);
      const double den = a - 2 * b + d;
      if (den < 0) pos = static_cast<double>(cand.apex) + std::clamp(0.5 * (a - d) / den, -0.5, 0.5);
    }
  }

  // half-maximum crossings on the raw corrected counts
  const double half = amp / 2;
  const auto apex_bin = std::min(n - 1, static_cast<std::size_t>(std::clamp(std::round(pos), 0.0, static_cast<double>(n - 1))));
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = c[j] - base;
  std::size_t l = apex_bin, r = apex_bin;
  while (l > 0 && y[l - 1] > half) --l;
  while (r + 1 < n && y[r + 1] > half) ++r;
  const double left = l > 0 ? crossing(y, l, l - 1, half) : static_cast<double>(l) - 0.5;
  const double right = r + 1 < n ? crossing(y, r, r + 1, half) : static_cast<double>(r) + 0.5;
  double width_bins = right - left;

  Peak p;
  p.skewness = 0.0;
  if (width_bins < 4.0) {
    // coarse peak: Sheppard-corrected second moment, then the bin added in quadrature
    const auto reach = static_cast<std::ptrdiff_t>(std::max(3.0, std::ceil(2 * width_bins)));
    double w0 = 0, w1 = 0, w2 = 0;
    for (std::ptrdiff_t k = -reach; k <= reach; ++k) {
      const auto j = static_cast<std::ptrdiff_t>(apex_bin) + k;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) continue;
      const double v = std::max(0.0, y[static_cast<std::size_t>(j)]);
      w0 += v;
      w1 += v * static_cast<double>(j);
      w2 += v * static_cast<double>(j) * static_cast<double>(j);
    }
    if (w0 > 0) {
      const double mean = w1 / w0;
      const double var = std::max(0.0, w2 / w0 - mean * mean - 1.0 / 12.0);
      const double w = units::kFwhmPerRms * std::sqrt(var);
      width_bins = std::sqrt(w * w + 1.0);
    }
  } else {
    // skewness over the contiguous region above 10% of the apex
    std::size_t a = apex_bin, b = apex_bin;
    while (a > 0 && s1[a - 1] - base > amp / 10) --a;
    while (b + 1 < n && s1[b + 1] - base > amp / 10) ++b;
    double w0 = 0, w1 = 0;
    for (std::size_t j = a; j <= b; ++j) {
      const double v = std::max(0.0, y[j]);
      w0 += v;
      w1 += v * static_cast<double>(j);
    }
    if (w0 > 0) {
      const double mean = w1 / w0;
      double m2 = 0, m3 = 0;
      for (std::size_t j = a; j <= b; ++j) {
        const double v = std::max(0.0, y[j]);
        const double d = static_cast<double>(j) - mean;
        m2 += v * d * d;
        m3 += v * d * d * d;
      }
      m2 /= w0;
      m3 /= w0;
      if (m2 > 0) p.skewness = m3 / std::pow(m2, 1.5);
    }
  }

  p.position_m = t.distance_m.front() + pos * t.spacing_m;
  p.fwhm_m = width_bins * t.spacing_m;
  p.apex_counts = amp + base;
  p.baseline_counts = base;
  p.height_db = display(amp + base, 0) - display(std::max(base, 0.5), 0);
  p.asymmetric = std::abs(p.skewness) > kSkewThreshold;
  const auto extra = static_cast<std::ptrdiff_t>(std::ceil(width_bins));
  const auto from = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor(left)) - extra);
  const auto to = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1,
                                           static_cast<std::ptrdiff_t>(std::ceil(right)) + extra);
  for (auto j = from; j <= to; ++j) p.area_counts += y[static_cast<std::size_t>(j)];
  return p;
}

std::mutex fftw_planner;

}  // namespace

double Trace::floor_db() const { return display(0.5, offset_db); }

std::size_t Trace::index_of(double z) const {
  if (distance_m.empty()) return 0;
  const double k = std::round((z - distance_m.front()) / spacing_m);
  return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(distance_m.size() - 1)));
}

Trace to_trace(const detection::Histogram& h, units::GroupIndex ctx, double offset_db) {
  Trace t;
  t.offset_db = offset_db;
  t.shots = h.shots;
  t.group_index = ctx.value;
  t.spacing_m = units::time_to_distance(h.bin_width_s, ctx);
  const std::size_t n = h.counts.size();
  t.distance_m.resize(n);
  t.level_db.resize(n);
  t.counts.resize(n);
  t.corrected.resize(n);
  const double k = static_cast<double>(h.shots);
  double remaining = k;
  for (std::size_t i = 0; i < n; ++i) {
    const double ni = static_cast<double>(h.counts[i]);
    t.distance_m[i] = units::time_to_distance(h.origin_s + (static_cast<double>(i) + 0.5) * h.bin_width_s, ctx);
    t.counts[i] = ni;
    double corrected = ni;
    if (k > 0 && ni > 0) {
      // Coates: hazard per bin among the shots still waiting for their first stop
      const double frac = ni < remaining ? ni / remaining : ni / (remaining + 0.5);
      corrected = -k * std::log1p(-frac);
    }
    remaining -= ni;
    t.corrected[i] = corrected;
    t.level_db[i] = corrected > 0 ? display(corrected, offset_db) : t.floor_db();
  }
  return t;
}

std::vector<Peak> find_peaks(const Trace& t, double min_prominence_db) {
  if (t.size() == 0) throw AnalysisError("empty trace");
  if (!(min_prominence_db > 0)) throw AnalysisError("min_prominence must be > 0");
  const auto& c = t.corrected;
  const std::size_t n = c.size();
  const auto s1 = gaussian_smooth(c, 1.0);
  const auto imax = static_cast<std::size_t>(std::max_element(s1.begin(), s1.end()) - s1.begin());
  if (!(s1[imax] > 0)) return {};

  // characteristic width from the strongest feature
  std::size_t l = imax, r = imax;
  while (l > 0 && s1[l - 1] > s1[imax] / 2) --l;
  while (r + 1 < n && s1[r + 1] > s1[imax] / 2) ++r;
  const double w0 = std::clamp(static_cast<double>(r - l + 1), 2.0, std::max(2.0, static_cast<double>(n) / 8));
  const auto s2 = gaussian_smooth(c, std::max(1.0, w0 / 5));
  const auto h = static_cast<std::ptrdiff_t>(std::max(1.0, std::round(w0 / 2)));
  const auto w = static_cast<std::ptrdiff_t>(std::ceil(w0));

  std::vector<Peak> peaks;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(s2[i] > 0)) continue;
    const auto ii = static_cast<std::ptrdiff_t>(i);
    bool is_max = true;
    for (auto j = std::max<std::ptrdiff_t>(0, ii - h); j <= std::min<std::ptrdiff_t>(ii + h, static_cast<std::ptrdiff_t>(n) - 1); ++j) {
      const double v = s2[static_cast<std::size_t>(j)];
      if (v > s2[i] || (v == s2[i] && j < ii)) {
        is_max = false;
        break;
      }
    }
    if (!is_max) continue;

    const auto left = flank(c, ii - 6 * w, ii - 3 * w);
    const auto right = flank(c, ii + 3 * w, ii + 6 * w);
    if (left.empty() && right.empty()) continue;
    double base = 0.0;
    if (!left.empty()) base = median(left);
    if (!right.empty()) base = std::max(base, median(right));

    if (display(s2[i], 0) - display(std::max(base, 0.5), 0) < min_prominence_db) continue;
    double sum = 0.0;
    std::ptrdiff_t cnt = 0;
    for (auto j = std::max<std::ptrdiff_t>(0, ii - h); j <= std::min<std::ptrdiff_t>(ii + h, static_cast<std::ptrdiff_t>(n) - 1); ++j, ++cnt)
      sum += c[static_cast<std::size_t>(j)];
    const double expected = base * static_cast<double>(cnt);
    if (sum - expected < 5.0 * std::sqrt(expected + 1.0)) continue;

    peaks.push_back(measure(t, s1, {i, base, s2[i]}));
  }
  return peaks;
}

double two_point_resolution(const std::vector<Peak>& peaks) {
  if (peaks.empty()) throw AnalysisError("no peaks: two-point resolution undefined");
  std::optional<double> best;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    bool isolated = true;
    for (std::size_t j = 0; j < peaks.size(); ++j)
      if (j != i && std::abs(peaks[j].position_m - peaks[i].position_m) < 1.5 * peaks[i].fwhm_m) isolated = false;
    if (isolated && (!best || peaks[i].fwhm_m < *best)) best = peaks[i].fwhm_m;
  }
  if (best) return *best;
  double narrowest = peaks.front().fwhm_m;
  for (const auto& p : peaks) narrowest = std::min(narrowest, p.fwhm_m);
  return narrowest;
}

double two_point_resolution(const Trace& t) { return two_point_resolution(find_peaks(t)); }

bool resolvable(const Trace& t, const Peak& a, const Peak& b, double dip_db) {
  const auto s1 = gaussian_smooth(t.corrected, 1.0);
  std::size_t i = t.index_of(a.position_m), j = t.index_of(b.position_m);
  if (i > j) std::swap(i, j);
  if (j - i < 2) return false;
  const double dip = *std::min_element(s1.begin() + static_cast<std::ptrdiff_t>(i),
                                       s1.begin() + static_cast<std::ptrdiff_t>(j) + 1);
  const double lower = std::min(a.apex_counts, b.apex_counts);
  return display(lower, 0) - display(std::max(dip, 0.5), 0) >= dip_db;
}

std::optional<NoiseRegion> noise_region(const Trace& t, std::optional<Window> hint) {
  const std::size_t n = t.size();
  const auto& c = t.corrected;
  constexpr std::size_t kMinBins = 20;
  auto mean_of = [&](std::size_t a, std::size_t b) {
    return std::accumulate(c.begin() + static_cast<std::ptrdiff_t>(a), c.begin() + static_cast<std::ptrdiff_t>(b), 0.0) /
           static_cast<double>(b - a);
  };
  if (hint) {
    std::size_t a = n, b = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (t.distance_m[i] >= hint->first && t.distance_m[i] <= hint->second) {
        a = std::min(a, i);
        b = i + 1;
      }
    if (a >= b || b - a < kMinBins) return std::nullopt;
    return NoiseRegion{*hint, mean_of(a, b)};
  }
  if (n < 2 * kMinBins) return std::nullopt;

  const std::size_t tail = std::max<std::size_t>(kMinBins, n / 20);
  const double m = mean_of(n - tail, n);
  const std::size_t width = std::max<std::size_t>(5, n / 100);
  const double threshold = m + 5.0 * std::sqrt(std::max(m, 1.0) / static_cast<double>(width));
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + c[i];
  std::size_t start = 0;
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t a = i >= width / 2 ? i - width / 2 : 0;
    const std::size_t b = std::min(n, a + width);
    if ((cum[b] - cum[a]) / static_cast<double>(b - a) > threshold) {
      start = std::min(n, i + width);
      break;
    }
  }
  if (n - start < kMinBins) return std::nullopt;
  // a genuine noise floor is flat: compare the two halves
  const std::size_t mid = start + (n - start) / 2;
  const double m1 = mean_of(start, mid), m2 = mean_of(mid, n);
  const double sd = std::sqrt(std::max((m1 + m2) / 2, 1.0) * (1.0 / static_cast<double>(mid - start) + 1.0 / static_cast<double>(n - mid)));
  if (std::abs(m1 - m2) > 5.0 * sd + 0.05 * (m1 + m2)) return std::nullopt;
  return NoiseRegion{{t.distance_m[start], t.distance_m.back()}, mean_of(start, n)};
}

double SlopeFit::relative_error(double attenuation_db_per_km) const {
  return std::abs(std::abs(slope_db_per_km) - attenuation_db_per_km) / attenuation_db_per_km;
}

SlopeFit fit_slope(const Trace& t, double z_start, double z_end, double background) {
  if (!(z_end > z_start)) throw AnalysisError("fit window must have z_end > z_start");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.distance_m[i] < z_start || t.distance_m[i] > z_end) continue;
    const double v = t.corrected[i] - background;
    if (t.counts[i] <= 0 || v <= 0) continue;
    x.push_back(t.distance_m[i] / 1000.0);
    y.push_back(display(v, t.offset_db));
  }
  if (x.size() < 50)
    throw AnalysisError("fit window holds " + std::to_string(x.size()) + " usable samples, need 50");
  const LineFit f = ols(x, y);
  return {f.slope, f.intercept, f.r2, x.size()};
}

DynamicRange dynamic_range(const Trace& t, const SlopeFit& fit, const NoiseRegion& noise, double pct) {
  std::vector<double> residual;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.distance_m[i] >= noise.window.first && t.distance_m[i] <= noise.window.second)
      residual.push_back(t.corrected[i] - noise.mean_counts);
  if (residual.empty()) throw AnalysisError("no noise region identifiable");
  DynamicRange dr;
  dr.noise_floor_db = display(std::max(percentile(residual, pct), 0.5), t.offset_db);
  dr.dynamic_range_db = std::max(0.0, fit.intercept_db - dr.noise_floor_db);
  return dr;
}

namespace {
constexpr double kBeatLineRatio = 10.0;
}

double beat_length(const Trace& t, double z_start, double z_end, double background) {
  std::vector<double> x, v;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.distance_m[i] < z_start || t.distance_m[i] > z_end) continue;
    x.push_back(t.distance_m[i]);
    v.push_back(t.corrected[i] - background);
  }
  const std::size_t n = v.size();
  if (n < 128) throw AnalysisError("beat-length window holds fewer than 128 samples");

  // detrend the exponential decay with a fit of ln(level)
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < n; ++i)
    if (v[i] > 0) {
      fx.push_back(x[i]);
      fy.push_back(std::log(v[i]));
    }
  if (fx.size() < n / 2) throw AnalysisError("no beat length detected");
  const LineFit trend = ols(fx, fy);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = v[i] / std::exp(trend.intercept + trend.slope * x[i]) - 1.0;

  // Welch average of Hann-windowed periodograms, 50% overlap
  const std::size_t m = std::max<std::size_t>(64, std::bit_floor(n / 4));
  const std::size_t hop = m / 2;
  std::vector<double> window(m), seg(m), power(m / 2 + 1, 0.0);
  for (std::size_t k = 0; k < m; ++k)
    window[k] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m)));
  auto* spec = fftw_alloc_complex(m / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), seg.data(), spec, FFTW_ESTIMATE);
  }
  std::size_t segments = 0;
  for (std::size_t s = 0; s + m <= n; s += hop, ++segments) {
    const double mean = std::accumulate(u.begin() + static_cast<std::ptrdiff_t>(s),
                                        u.begin() + static_cast<std::ptrdiff_t>(s + m), 0.0) / static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) seg[k] = (u[s + k] - mean) * window[k];
    fftw_execute(plan);
    for (std::size_t k = 0; k <= m / 2; ++k) power[k] += spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
  }
  {
    std::lock_guard lock(fftw_planner);
    fftw_destroy_plan(plan);
  }
  fftw_free(spec);
  if (segments == 0) throw AnalysisError("beat-length window shorter than one segment");

  constexpr std::size_t kSkip = 2;  // trend residue lives in the lowest bins
  std::vector<double> band(power.begin() + kSkip + 1, power.end());
  const auto best = static_cast<std::size_t>(std::max_element(band.begin(), band.end()) - band.begin()) + kSkip + 1;
  // the noise floor is coloured by the pulse shape: compare with the neighbourhood, not the whole band
  const std::size_t reach = std::max<std::size_t>(8, m / 32);
  std::vector<double> local;
  for (std::size_t k = kSkip + 1; k < power.size(); ++k) {
    const std::size_t d = k > best ? k - best : best - k;
    if (d > 3 && d <= reach) local.push_back(power[k]);
  }
  if (local.empty() || power[best] <= 0 || !(power[best] >= kBeatLineRatio * median(local)))
    throw AnalysisError("no beat length detected");
  double delta = 0.0;
  if (best + 1 < power.size() && power[best - 1] > 0 && power[best + 1] > 0) {
    const double a = std::log(power[best - 1]), b = std::log(power[best]), c = std::log(power[best + 1]);
    const double den = a - 2 * b + c;
    if (den < 0) delta = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
  }
  const double f = (static_cast<double>(best) + delta) / (static_cast<double>(m) * t.spacing_m);
  return 2.0 / f;
}

double optical_separation(double a, double b, const std::vector<Window>& air, double group_index) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  double d = hi - lo;
  for (const auto& [ra, rb] : air) {
    const double overlap = std::min(hi, rb) - std::max(lo, ra);
    if (overlap > 0) d += overlap * (group_index - 1.0);
  }
  return d;
}

Report analyze(const Trace& t, const Options& opt) {
  Report rep;
  rep.peaks = find_peaks(t, opt.min_prominence_db);
  for (std::size_t i = 1; i < rep.peaks.size(); ++i) {
    const auto& a = rep.peaks[i - 1];
    const auto& b = rep.peaks[i];
    rep.separations.push_back({b.position_m - a.position_m,
                               optical_separation(a.position_m, b.position_m, opt.air_regions_m, t.group_index),
                               resolvable(t, a, b, opt.resolvable_dip_db)});
  }
  if (!rep.peaks.empty()) rep.delta_m = two_point_resolution(rep.peaks);

  const auto noise = noise_region(t, opt.noise_window_m);
  if (opt.noise_window_m && !noise) throw AnalysisError("noise window holds fewer than 20 samples");
  const double bg = noise ? noise->mean_counts : 0.0;
  if (opt.fit_window_m) {
    const auto fit = fit_slope(t, opt.fit_window_m->first, opt.fit_window_m->second, bg);
    rep.slope_db_per_km = fit.slope_db_per_km;
    rep.slope_r2 = fit.r2;
    if (noise) {
      const auto dr = dynamic_range(t, fit, *noise, opt.noise_percentile);
      rep.dynamic_range_db = dr.dynamic_range_db;
      rep.noise_floor_db = dr.noise_floor_db;
    }
    if (opt.beat_length) {
      try {
        rep.beat_length_m = beat_length(t, opt.fit_window_m->first, opt.fit_window_m->second, bg);
      } catch (const AnalysisError&) {
        rep.beat_length_m.reset();
      }
    }
  }
  return rep;
}

}  // namespace psiotdr::analysis
