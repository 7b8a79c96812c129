#include "core/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "core/rng.hpp"

namespace psiotdr::experiments {

analysis::Accuracy accuracy(const scenario::Scenario& s, const AccuracyOptions& opt) {
  if (opt.repeats < 2) throw analysis::AnalysisError("accuracy needs at least 2 repeats");
  const std::uint64_t seed = opt.seed.value_or(s.seed);
  const std::uint64_t shots = opt.shots.value_or(s.shot_count());
  const auto options = s.analysis_options();
  const units::GroupIndex ctx(s.group_index_display);

  analysis::Accuracy acc;
  for (std::size_t i = 0; i < opt.repeats; ++i) {
    const std::uint64_t rs = opt.identical_seeds ? seed : rng::derive_seed(seed, i);
    const auto h = detection::simulate(s.setup, shots, rs, opt.threads);
    const auto trace = analysis::to_trace(h, ctx);
    auto peaks = analysis::find_peaks(trace, options.min_prominence_db);
    const std::string who = "repeat " + std::to_string(i) + " (seed " + std::to_string(rs) + ")";
    if (peaks.size() < 2) throw analysis::AnalysisError(who + ": fewer than two peaks found");
    std::partial_sort(peaks.begin(), peaks.begin() + 2, peaks.end(),
                      [](const auto& a, const auto& b) { return a.area_counts > b.area_counts; });
    if (!analysis::resolvable(trace, peaks[0], peaks[1], options.resolvable_dip_db))
      throw analysis::AnalysisError(who + ": the two strongest peaks are not resolvable");
    acc.seeds.push_back(rs);
    acc.distances_m.push_back(analysis::optical_separation(peaks[0].position_m, peaks[1].position_m,
                                                           options.air_regions_m, ctx.value));
  }
  acc.n = acc.distances_m.size();
  double sum = 0.0;
  for (double d : acc.distances_m) sum += d;
  acc.mean_m = sum / static_cast<double>(acc.n);
  double ss = 0.0;
  for (double d : acc.distances_m) ss += (d - acc.mean_m) * (d - acc.mean_m);
  acc.std_m = std::sqrt(ss / static_cast<double>(acc.n - 1));
  return acc;
}

}  // namespace psiotdr::experiments
