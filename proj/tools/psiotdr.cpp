// psiotdr command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "psiotdr/psiotdr.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAnalysis = 3;

int exit_code(psiotdr_status st) {
  switch (st) {
    case PSIOTDR_OK: return kExitOk;
    case PSIOTDR_ERR_ANALYSIS: return kExitAnalysis;
    case PSIOTDR_ERR_CONFIG:
    case PSIOTDR_ERR_IO:
    case PSIOTDR_ERR_INVALID_ARGUMENT: return kExitConfig;
    default: return 1;
  }
}

int report(psiotdr_status st) {
  if (st != PSIOTDR_OK) std::cerr << "psiotdr: " << psiotdr_last_error() << "\n";
  return exit_code(st);
}

// owned C string from the library
struct CStr {
  char* p = nullptr;
  ~CStr() { psiotdr_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Scenario {
  psiotdr_scenario* p = nullptr;
  ~Scenario() { psiotdr_scenario_free(p); }
};

struct Histogram {
  psiotdr_histogram* p = nullptr;
  ~Histogram() { psiotdr_histogram_free(p); }
};

// "preset:<name>" or a path
psiotdr_status load_scenario(const std::string& arg, Scenario& s) {
  const std::string prefix = "preset:";
  if (arg.rfind(prefix, 0) == 0) return psiotdr_scenario_preset(arg.substr(prefix.size()).c_str(), &s.p);
  return psiotdr_scenario_load_file(arg.c_str(), &s.p);
}

unsigned default_threads() {
  if (const char* env = std::getenv("PSIOTDR_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0') return static_cast<unsigned>(v);
  }
  return 0;
}

// "a,b" -> {a, b}
std::pair<double, double> parse_window(const std::string& s, const std::string& flag) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError(flag, "expected a,b");
  try {
    std::size_t used = 0;
    const double a = std::stod(s.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument(s);
    const std::string rest = s.substr(comma + 1);
    const double b = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(s);
    if (!(a < b)) throw CLI::ValidationError(flag, "expected a < b");
    return {a, b};
  } catch (const std::logic_error&) {
    throw CLI::ValidationError(flag, "expected two numbers a,b");
  }
}

struct RunFlags {
  std::optional<std::uint64_t> seed;
  std::optional<long long> shots;
  unsigned threads = default_threads();

  void add(CLI::App* app) {
    app->add_option("--seed", seed, "Override the scenario seed");
    app->add_option("--shots", shots, "Override the scenario shot count");
    app->add_option("--threads", threads, "Worker threads (0: all cores; default from PSIOTDR_THREADS)");
  }

  // shots < 1 is a configuration error
  std::optional<psiotdr_run_options> options() const {
    psiotdr_run_options o;
    psiotdr_run_options_init(&o);
    if (seed) {
      o.has_seed = 1;
      o.seed = *seed;
    }
    if (shots) {
      if (*shots < 1) return std::nullopt;
      o.has_shots = 1;
      o.shots = static_cast<std::uint64_t>(*shots);
    }
    o.threads = threads;
    return o;
  }
};

int shots_error() {
  std::cerr << "psiotdr: shots must be >= 1\n";
  return kExitConfig;
}

int write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return kExitOk;
  }
  return report(psiotdr_write_text_file(path.c_str(), text.c_str()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-counting OTDR simulator and trace analyzer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", psiotdr_version());

  // simulate
  std::string sim_scenario, sim_out;
  RunFlags sim_run;
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo acquisition and write the histogram CSV");
  sim->add_option("scenario", sim_scenario, "Scenario JSON file or preset:<name>")->required();
  sim->add_option("--out,-o", sim_out, "Histogram CSV")->required();
  sim_run.add(sim);

  // analyze
  std::string an_hist, an_out, an_scenario, an_fit, an_noise;
  std::vector<std::string> an_air;
  double an_ng = 0.0, an_prom = 0.0;
  bool an_no_beat = false;
  auto* an = app.add_subcommand("analyze", "Extract figures of merit from a histogram");
  an->add_option("histogram", an_hist, "Histogram CSV")->required();
  an->add_option("--out,-o", an_out, "Report JSON (default: stdout)");
  an->add_option("--scenario", an_scenario, "Take analysis hints from a scenario file or preset:<name>");
  an->add_option("--fit-window", an_fit, "Slope fit window a,b in metres");
  an->add_option("--noise-window", an_noise, "Noise window a,b in metres");
  an->add_option("--air-region", an_air, "Air span a,b in metres (repeatable)");
  an->add_option("--group-index", an_ng, "Group index for the distance axis");
  an->add_option("--min-prominence", an_prom, "Peak prominence threshold in display dB");
  an->add_flag("--no-beat-length", an_no_beat, "Skip beat-length estimation");

  // trace
  std::string tr_hist, tr_out, tr_plot;
  double tr_ng = 0.0;
  auto* tr = app.add_subcommand("trace", "Convert a histogram to a dB-versus-distance trace");
  tr->add_option("histogram", tr_hist, "Histogram CSV")->required();
  tr->add_option("--out,-o", tr_out, "Trace CSV")->required();
  tr->add_option("--plot", tr_plot, "Also write an SVG plot");
  tr->add_option("--group-index", tr_ng, "Group index for the distance axis");

  // accuracy
  std::string acc_scenario, acc_out;
  std::size_t acc_repeats = 10;
  bool acc_identical = false;
  RunFlags acc_run;
  auto* acc = app.add_subcommand("accuracy", "Repeat an acquisition and report the spread of the measured separation");
  acc->add_option("scenario", acc_scenario, "Scenario JSON file or preset:<name>")->required();
  acc->add_option("--repeats,-n", acc_repeats, "Number of acquisitions")->check(CLI::Range(2, 100000));
  acc->add_option("--out,-o", acc_out, "Report JSON (default: stdout)");
  acc->add_flag("--identical-seeds", acc_identical, "Reuse one seed for every repeat");
  acc_run.add(acc);

  // preset
  std::string pre_name, pre_out;
  bool pre_list = false;
  auto* pre = app.add_subcommand("preset", "Write a built-in scenario file");
  pre->add_option("name", pre_name, "Preset name");
  pre->add_option("--out,-o", pre_out, "Scenario JSON (default: stdout)");
  pre->add_flag("--list", pre_list, "List preset names");

  // validate
  std::string val_scenario;
  auto* val = app.add_subcommand("validate", "Check a scenario and print derived quantities");
  val->add_option("scenario", val_scenario, "Scenario JSON file or preset:<name>")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sim) {
      const auto opt = sim_run.options();
      if (!opt) return shots_error();
      Scenario s;
      if (auto st = load_scenario(sim_scenario, s)) return report(st);
      Histogram h;
      if (auto st = psiotdr_simulate(s.p, &*opt, &h.p)) return report(st);
      return report(psiotdr_histogram_write_csv(h.p, sim_out.c_str()));
    }

    if (*an) {
      Histogram h;
      if (auto st = psiotdr_histogram_read_csv(an_hist.c_str(), &h.p)) return report(st);
      Scenario hints;
      if (!an_scenario.empty())
        if (auto st = load_scenario(an_scenario, hints)) return report(st);
      psiotdr_analysis_options o;
      psiotdr_analysis_options_init(&o);
      if (!an_fit.empty()) {
        const auto [a, b] = parse_window(an_fit, "--fit-window");
        o.has_fit_window = 1;
        o.fit_window_m[0] = a;
        o.fit_window_m[1] = b;
      }
      if (!an_noise.empty()) {
        const auto [a, b] = parse_window(an_noise, "--noise-window");
        o.has_noise_window = 1;
        o.noise_window_m[0] = a;
        o.noise_window_m[1] = b;
      }
      std::vector<double> air;
      for (const auto& r : an_air) {
        const auto [a, b] = parse_window(r, "--air-region");
        air.push_back(a);
        air.push_back(b);
      }
      o.air_regions_m = air.data();
      o.air_region_count = air.size() / 2;
      o.group_index = an_ng;
      o.min_prominence_db = an_prom;
      o.beat_length = an_no_beat ? 0 : 1;
      CStr json;
      if (auto st = psiotdr_analyze(h.p, hints.p, &o, &json.p)) return report(st);
      return write_text(an_out, json.str());
    }

    if (*tr) {
      Histogram h;
      if (auto st = psiotdr_histogram_read_csv(tr_hist.c_str(), &h.p)) return report(st);
      if (auto st = psiotdr_trace_write_csv(h.p, tr_ng, tr_out.c_str())) return report(st);
      if (!tr_plot.empty()) return report(psiotdr_trace_write_svg(h.p, tr_ng, 0.0, tr_plot.c_str()));
      return kExitOk;
    }

    if (*acc) {
      const auto opt = acc_run.options();
      if (!opt) return shots_error();
      Scenario s;
      if (auto st = load_scenario(acc_scenario, s)) return report(st);
      CStr json;
      if (auto st = psiotdr_accuracy(s.p, acc_repeats, acc_identical ? 1 : 0, &*opt, &json.p)) return report(st);
      return write_text(acc_out, json.str());
    }

    if (*pre) {
      if (pre_list || pre_name.empty()) {
        CStr names;
        if (auto st = psiotdr_preset_names(&names.p)) return report(st);
        std::cout << names.str();
        return pre_list ? kExitOk : kExitConfig;
      }
      Scenario s;
      if (auto st = psiotdr_scenario_preset(pre_name.c_str(), &s.p)) return report(st);
      if (!pre_out.empty() && pre_out != "-") return report(psiotdr_scenario_write_file(s.p, pre_out.c_str()));
      CStr json;
      if (auto st = psiotdr_scenario_to_json(s.p, &json.p)) return report(st);
      std::cout << json.str();
      return kExitOk;
    }

    if (*val) {
      Scenario s;
      if (auto st = load_scenario(val_scenario, s)) return report(st);
      CStr diag;
      if (auto st = psiotdr_scenario_diagnostics(s.p, &diag.p)) return report(st);
      const auto d = nlohmann::json::parse(diag.str());
      std::printf("ok\n");
      std::printf("round_trip_s            %.6g\n", d["round_trip_s"].get<double>());
      std::printf("max_repetition_rate_hz  %.6g\n", d["max_repetition_rate_hz"].get<double>());
      std::printf("repetition_rate_hz      %.6g\n", d["repetition_rate_hz"].get<double>());
      std::printf("shots                   %llu\n",
                  static_cast<unsigned long long>(d["shots"].get<std::uint64_t>()));
      std::printf("per_shot_probability    %.4g\n", d["per_shot_probability"].get<double>());
      for (const auto& w : d["warnings"]) std::printf("warning: %s\n", w.get<std::string>().c_str());
      return kExitOk;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "psiotdr: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "psiotdr: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
