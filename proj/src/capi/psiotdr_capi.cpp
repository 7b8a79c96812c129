#include "psiotdr/psiotdr.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include <unistd.h>

#include "core/analysis.hpp"
#include "core/detection.hpp"
#include "core/experiments.hpp"
#include "core/report.hpp"
#include "core/scenario.hpp"
#include "json.hpp"

struct psiotdr_scenario {
  psiotdr::scenario::Scenario s;
};

struct psiotdr_histogram {
  psiotdr::detection::Histogram h;
};

namespace {

using namespace psiotdr;

thread_local std::string g_error;

psiotdr_status fail(psiotdr_status code, std::string msg) {
  g_error = std::move(msg);
  return code;
}

std::string join(const std::vector<std::string>& issues) {
  std::string out;
  for (const auto& i : issues) out += (out.empty() ? "" : "\n") + i;
  return out;
}

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Map exceptions to status codes. Every entry point goes through here.
template <class F>
psiotdr_status guarded(F&& f) {
  try {
    g_error.clear();
    f();
    return PSIOTDR_OK;
  } catch (const scenario::ConfigError& e) {
    return fail(PSIOTDR_ERR_CONFIG, join(e.issues()));
  } catch (const link::ValidationError& e) {
    return fail(PSIOTDR_ERR_CONFIG, join(e.issues()));
  } catch (const units::DomainError& e) {
    return fail(PSIOTDR_ERR_CONFIG, e.what());
  } catch (const detection::FormatError& e) {
    return fail(PSIOTDR_ERR_IO, e.what());
  } catch (const IoError& e) {
    return fail(PSIOTDR_ERR_IO, e.what());
  } catch (const analysis::AnalysisError& e) {
    return fail(PSIOTDR_ERR_ANALYSIS, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(PSIOTDR_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PSIOTDR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PSIOTDR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PSIOTDR_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw std::invalid_argument(std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

// write next to the target and rename over it
void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + path);
    os << content;
    os.flush();
    if (!os) {
      os.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("cannot write " + path);
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot write " + path + ": " + ec.message());
  }
}

analysis::Trace trace_of(const detection::Histogram& h, double group_index) {
  return analysis::to_trace(h, units::GroupIndex(group_index > 0 ? group_index : units::kDefaultGroupIndex));
}

detection::Histogram run(const scenario::Scenario& s, const psiotdr_run_options* opt) {
  const std::uint64_t seed = opt && opt->has_seed ? opt->seed : s.seed;
  std::uint64_t shots = opt && opt->has_shots ? opt->shots : s.shot_count();
  const unsigned threads = opt ? opt->threads : 0;
  if (opt && opt->has_shots && shots < 1) throw scenario::ConfigError({"shots must be >= 1"});
  auto h = detection::simulate(s.setup, shots, seed, threads);
  h.scenario_hash = scenario::hash(s);
  return h;
}

}  // namespace

extern "C" {

const char* psiotdr_version(void) { return "1.0.0"; }

const char* psiotdr_last_error(void) { return g_error.c_str(); }

void psiotdr_string_free(char* s) { std::free(s); }

psiotdr_status psiotdr_scenario_load_file(const char* path, psiotdr_scenario** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    if (!std::filesystem::exists(path)) throw scenario::ConfigError({std::string(path) + ": cannot open file"});
    *out = new psiotdr_scenario{scenario::load_file(path)};
  });
}

psiotdr_status psiotdr_scenario_from_json(const char* json, psiotdr_scenario** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = nullptr;
    *out = new psiotdr_scenario{scenario::from_json(json)};
  });
}

psiotdr_status psiotdr_scenario_preset(const char* name, psiotdr_scenario** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = nullptr;
    *out = new psiotdr_scenario{scenario::preset(name)};
  });
}

void psiotdr_scenario_free(psiotdr_scenario* s) { delete s; }

psiotdr_status psiotdr_preset_names(char** out) {
  return guarded([&] {
    require(out, "out");
    std::string names;
    for (const auto& n : scenario::preset_names()) names += n + "\n";
    *out = dup(names);
  });
}

psiotdr_status psiotdr_scenario_to_json(const psiotdr_scenario* s, char** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = dup(scenario::to_json(s->s));
  });
}

psiotdr_status psiotdr_scenario_write_file(const psiotdr_scenario* s, const char* path) {
  return guarded([&] {
    require(s, "scenario");
    require(path, "path");
    atomic_write(path, scenario::to_json(s->s));
  });
}

psiotdr_status psiotdr_scenario_hash(const psiotdr_scenario* s, char** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = dup(scenario::hash(s->s));
  });
}

uint64_t psiotdr_scenario_seed(const psiotdr_scenario* s) { return s ? s->s.seed : 0; }

uint64_t psiotdr_scenario_shots(const psiotdr_scenario* s) { return s ? s->s.shot_count() : 0; }

psiotdr_status psiotdr_scenario_diagnostics(const psiotdr_scenario* s, char** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    const auto d = scenario::diagnose(s->s);
    nlohmann::ordered_json j;
    j["round_trip_s"] = d.round_trip_s;
    j["max_repetition_rate_hz"] = d.max_repetition_rate_hz;
    j["repetition_rate_hz"] = d.repetition_rate_hz;
    j["shots"] = d.shots;
    j["per_shot_probability"] = d.per_shot_probability;
    j["warnings"] = d.warnings;
    *out = dup(j.dump(2) + "\n");
  });
}

void psiotdr_run_options_init(psiotdr_run_options* opt) {
  if (opt) *opt = psiotdr_run_options{0, 0, 0, 0, 0};
}

psiotdr_status psiotdr_simulate(const psiotdr_scenario* s, const psiotdr_run_options* opt,
                                psiotdr_histogram** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = nullptr;
    *out = new psiotdr_histogram{run(s->s, opt)};
  });
}

psiotdr_status psiotdr_histogram_read_csv(const char* path, psiotdr_histogram** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError(std::string(path) + ": cannot open file");
    try {
      *out = new psiotdr_histogram{detection::read_csv(is)};
    } catch (const detection::FormatError& e) {
      throw detection::FormatError(std::string(path) + ": " + e.what());
    }
  });
}

psiotdr_status psiotdr_histogram_write_csv(const psiotdr_histogram* h, const char* path) {
  return guarded([&] {
    require(h, "histogram");
    require(path, "path");
    std::ostringstream os;
    detection::write_csv(h->h, os);
    atomic_write(path, os.str());
  });
}

psiotdr_status psiotdr_histogram_to_csv(const psiotdr_histogram* h, char** out) {
  return guarded([&] {
    require(h, "histogram");
    require(out, "out");
    std::ostringstream os;
    detection::write_csv(h->h, os);
    *out = dup(os.str());
  });
}

void psiotdr_histogram_free(psiotdr_histogram* h) { delete h; }

size_t psiotdr_histogram_bins(const psiotdr_histogram* h) { return h ? h->h.counts.size() : 0; }

uint64_t psiotdr_histogram_count(const psiotdr_histogram* h, size_t bin) {
  return h && bin < h->h.counts.size() ? h->h.counts[bin] : 0;
}

uint64_t psiotdr_histogram_shots(const psiotdr_histogram* h) { return h ? h->h.shots : 0; }
uint64_t psiotdr_histogram_seed(const psiotdr_histogram* h) { return h ? h->h.seed : 0; }
double psiotdr_histogram_bin_width_s(const psiotdr_histogram* h) { return h ? h->h.bin_width_s : 0.0; }
double psiotdr_histogram_origin_s(const psiotdr_histogram* h) { return h ? h->h.origin_s : 0.0; }

void psiotdr_analysis_options_init(psiotdr_analysis_options* opt) {
  if (!opt) return;
  *opt = psiotdr_analysis_options{};
  opt->beat_length = 1;
}

psiotdr_status psiotdr_analyze(const psiotdr_histogram* h, const psiotdr_scenario* hints,
                               const psiotdr_analysis_options* opt, char** out) {
  return guarded([&] {
    require(h, "histogram");
    require(out, "out");
    analysis::Options o;
    double n_g = units::kDefaultGroupIndex;
    if (hints) {
      o = hints->s.analysis_options();
      n_g = hints->s.group_index_display;
    }
    if (opt) {
      if (opt->has_fit_window) o.fit_window_m = analysis::Window{opt->fit_window_m[0], opt->fit_window_m[1]};
      if (opt->has_noise_window)
        o.noise_window_m = analysis::Window{opt->noise_window_m[0], opt->noise_window_m[1]};
      if (opt->air_region_count > 0) {
        require(opt->air_regions_m, "air_regions_m");
        o.air_regions_m.clear();
        for (size_t i = 0; i < opt->air_region_count; ++i)
          o.air_regions_m.emplace_back(opt->air_regions_m[2 * i], opt->air_regions_m[2 * i + 1]);
      }
      if (opt->group_index > 0) n_g = opt->group_index;
      if (opt->min_prominence_db > 0) o.min_prominence_db = opt->min_prominence_db;
      o.beat_length = opt->beat_length != 0;
    }
    if (o.fit_window_m && o.fit_window_m->first >= o.fit_window_m->second)
      throw std::invalid_argument("fit window must satisfy a < b");
    if (o.noise_window_m && o.noise_window_m->first >= o.noise_window_m->second)
      throw std::invalid_argument("noise window must satisfy a < b");
    const auto t = trace_of(h->h, n_g);
    *out = dup(report::to_json(analysis::analyze(t, o)));
  });
}

psiotdr_status psiotdr_trace_write_csv(const psiotdr_histogram* h, double group_index, const char* path) {
  return guarded([&] {
    require(h, "histogram");
    require(path, "path");
    std::ostringstream os;
    report::write_trace_csv(trace_of(h->h, group_index), os);
    atomic_write(path, os.str());
  });
}

psiotdr_status psiotdr_trace_write_svg(const psiotdr_histogram* h, double group_index, double min_prominence_db,
                                       const char* path) {
  return guarded([&] {
    require(h, "histogram");
    require(path, "path");
    const auto t = trace_of(h->h, group_index);
    const auto peaks =
        analysis::find_peaks(t, min_prominence_db > 0 ? min_prominence_db : analysis::kDefaultProminenceDb);
    std::ostringstream os;
    report::write_trace_svg(t, os, peaks);
    atomic_write(path, os.str());
  });
}

psiotdr_status psiotdr_accuracy(const psiotdr_scenario* s, size_t repeats, int identical_seeds,
                                const psiotdr_run_options* opt, char** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    if (repeats < 2) throw std::invalid_argument("repeats must be >= 2");
    experiments::AccuracyOptions a;
    a.repeats = repeats;
    a.identical_seeds = identical_seeds != 0;
    if (opt) {
      a.threads = opt->threads;
      if (opt->has_seed) a.seed = opt->seed;
      if (opt->has_shots) {
        if (opt->shots < 1) throw scenario::ConfigError({"shots must be >= 1"});
        a.shots = opt->shots;
      }
    }
    analysis::Report r;
    r.accuracy = experiments::accuracy(s->s, a);
    *out = dup(report::to_json(r));
  });
}

double psiotdr_nep(double efficiency, double dark_rate_hz, double wavelength_m) {
  detection::DetectorModel d;
  d.efficiency = efficiency;
  d.dark_rate_hz = dark_rate_hz;
  return detection::nep(d, wavelength_m);
}

psiotdr_status psiotdr_write_text_file(const char* path, const char* content) {
  return guarded([&] {
    require(path, "path");
    require(content, "content");
    atomic_write(path, content);
  });
}

}  // extern "C"
