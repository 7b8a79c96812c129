#include "core/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "core/units.hpp"

namespace psiotdr::scenario {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string join(const std::vector<std::string>& issues) {
  std::string out = "invalid scenario:";
  for (const auto& i : issues) out += "\n  " + i;
  return out;
}

struct Path {
  std::string dotted;
  std::string pointer;

  Path key(const std::string& k) const { return {dotted.empty() ? k : dotted + "." + k, pointer + "/" + k}; }
  Path index(std::size_t i) const {
    return {dotted + "[" + std::to_string(i) + "]", pointer + "/" + std::to_string(i)};
  }
};

class Reader {
public:
  std::vector<std::string> issues;
  std::set<std::string> calibrated;

  void only(const json& obj, std::initializer_list<const char*> keys, const Path& at) {
    for (const auto& [k, v] : obj.items()) {
      bool known = false;
      for (const char* allowed : keys) known = known || k == allowed;
      if (!known) issues.push_back(at.key(k).dotted + ": unknown field");
    }
  }

  const json* object(const json& parent, const char* k, const Path& at, bool required) {
    const Path p = at.key(k);
    if (!parent.contains(k) || parent[k].is_null()) {
      if (required) issues.push_back(p.dotted + " is required");
      return nullptr;
    }
    if (!parent[k].is_object()) {
      issues.push_back(p.dotted + " must be an object");
      return nullptr;
    }
    return &parent[k];
  }

  // Number or {"value": x, "calibrated": bool}; empty when absent or null.
  std::optional<double> number(const json& obj, const char* k, const Path& at, bool required) {
    const Path p = at.key(k);
    if (!obj.contains(k) || obj[k].is_null()) {
      if (required) issues.push_back(p.dotted + " is required");
      return std::nullopt;
    }
    const json& v = obj[k];
    if (v.is_number()) return v.get<double>();
    if (v.is_object() && v.contains("value") && v["value"].is_number()) {
      for (const auto& [kk, vv] : v.items())
        if (kk != "value" && kk != "calibrated") issues.push_back(p.dotted + "." + kk + ": unknown field");
      if (v.contains("calibrated")) {
        if (!v["calibrated"].is_boolean())
          issues.push_back(p.dotted + ".calibrated must be a boolean");
        else if (v["calibrated"].get<bool>())
          calibrated.insert(p.pointer);
      }
      return v["value"].get<double>();
    }
    issues.push_back(p.dotted + " must be a number (or {\"value\": number, \"calibrated\": bool})");
    return std::nullopt;
  }

  double number_or(const json& obj, const char* k, const Path& at, double fallback) {
    return number(obj, k, at, false).value_or(fallback);
  }

  std::optional<std::string> string(const json& obj, const char* k, const Path& at, bool required) {
    const Path p = at.key(k);
    if (!obj.contains(k) || obj[k].is_null()) {
      if (required) issues.push_back(p.dotted + " is required");
      return std::nullopt;
    }
    if (!obj[k].is_string()) {
      issues.push_back(p.dotted + " must be a string");
      return std::nullopt;
    }
    return obj[k].get<std::string>();
  }

  std::optional<analysis::Window> window(const json& obj, const char* k, const Path& at) {
    if (!obj.contains(k) || obj[k].is_null()) return std::nullopt;
    return window_value(obj[k], at.key(k));
  }

  std::optional<analysis::Window> window_value(const json& v, const Path& p) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      issues.push_back(p.dotted + " must be [start_m, end_m]");
      return std::nullopt;
    }
    return analysis::Window{v[0].get<double>(), v[1].get<double>()};
  }
};

link::Element read_element(Reader& r, const json& e, const Path& at) {
  const auto type = r.string(e, "type", at, true).value_or("");
  if (type == "fiber") {
    r.only(e, {"type", "length_m", "attenuation_db_per_km", "group_index", "backscatter_db",
               "dispersion_ps_per_nm_km", "beat_length_m", "birefringence_axis_rad"}, at);
    link::FiberSegment f;
    f.length_m = r.number(e, "length_m", at, true).value_or(0.0);
    f.attenuation_db_per_km = r.number_or(e, "attenuation_db_per_km", at, f.attenuation_db_per_km);
    f.group_index = r.number_or(e, "group_index", at, f.group_index);
    f.backscatter_db = r.number_or(e, "backscatter_db", at, f.backscatter_db);
    f.dispersion_ps_per_nm_km = r.number_or(e, "dispersion_ps_per_nm_km", at, f.dispersion_ps_per_nm_km);
    f.beat_length_m = r.number(e, "beat_length_m", at, false);
    f.birefringence_axis_rad = r.number_or(e, "birefringence_axis_rad", at, 0.0);
    return f;
  }
  if (type == "reflector") {
    r.only(e, {"type", "reflectance_db"}, at);
    return link::Reflector{r.number(e, "reflectance_db", at, true).value_or(0.0)};
  }
  if (type == "splice") {
    r.only(e, {"type", "loss_db"}, at);
    return link::Splice{r.number(e, "loss_db", at, true).value_or(0.0)};
  }
  if (type == "air_gap") {
    r.only(e, {"type", "length_m", "surface_reflectance_db", "coupling_loss_db"}, at);
    link::AirGap g;
    g.length_m = r.number(e, "length_m", at, true).value_or(0.0);
    g.surface_reflectance_db = r.number_or(e, "surface_reflectance_db", at,
                                           units::to_db(link::fresnel_reflectance(units::kDefaultGroupIndex, 1.0)));
    g.coupling_loss_db = r.number_or(e, "coupling_loss_db", at, 0.0);
    return g;
  }
  if (type == "fiber_end") {
    r.only(e, {"type", "termination", "reflectance_db"}, at);
    link::FiberEnd end;
    const auto term = r.string(e, "termination", at, true).value_or("cleaved");
    if (term == "cleaved") end.termination = link::Termination::Cleaved;
    else if (term == "connector") end.termination = link::Termination::Connector;
    else if (term == "terminated") end.termination = link::Termination::Terminated;
    else r.issues.push_back(at.key("termination").dotted + " must be cleaved, connector or terminated");
    end.reflectance_db = r.number(e, "reflectance_db", at, false);
    return end;
  }
  if (!type.empty())
    r.issues.push_back(at.key("type").dotted + ": unknown element type '" + type + "'");
  return link::Splice{};
}

detection::DetectorModel read_detector(Reader& r, const json& d, const Path& at) {
  r.only(d, {"efficiency", "dark_rate_hz", "jitter_fwhm_s", "dead_time_s", "analyzer_angle_rad"}, at);
  detection::DetectorModel m;
  m.efficiency = r.number_or(d, "efficiency", at, m.efficiency);
  m.dark_rate_hz = r.number_or(d, "dark_rate_hz", at, m.dark_rate_hz);
  m.jitter_fwhm_s = r.number_or(d, "jitter_fwhm_s", at, m.jitter_fwhm_s);
  m.dead_time_s = r.number_or(d, "dead_time_s", at, m.dead_time_s);
  m.analyzer_angle_rad = r.number(d, "analyzer_angle_rad", at, false);
  return m;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

const char* termination_name(link::Termination t) {
  switch (t) {
    case link::Termination::Cleaved: return "cleaved";
    case link::Termination::Connector: return "connector";
    case link::Termination::Terminated: return "terminated";
  }
  return "cleaved";
}

class Writer {
public:
  explicit Writer(const std::set<std::string>& calibrated) : calibrated_(calibrated) {}

  ojson num(double v, const std::string& pointer) const {
    if (calibrated_.count(pointer)) {
      ojson o;
      o["value"] = v;
      o["calibrated"] = true;
      return o;
    }
    return v;
  }
  ojson opt(const std::optional<double>& v, const std::string& pointer) const {
    return v ? num(*v, pointer) : ojson(nullptr);
  }

private:
  const std::set<std::string>& calibrated_;
};

ojson window_json(const std::optional<analysis::Window>& w) {
  if (!w) return nullptr;
  return ojson::array({w->first, w->second});
}

ojson detector_json(const Writer& w, const detection::DetectorModel& d, const std::string& p) {
  ojson o;
  o["efficiency"] = w.num(d.efficiency, p + "/efficiency");
  o["dark_rate_hz"] = w.num(d.dark_rate_hz, p + "/dark_rate_hz");
  o["jitter_fwhm_s"] = w.num(d.jitter_fwhm_s, p + "/jitter_fwhm_s");
  o["dead_time_s"] = w.num(d.dead_time_s, p + "/dead_time_s");
  o["analyzer_angle_rad"] = w.opt(d.analyzer_angle_rad, p + "/analyzer_angle_rad");
  return o;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

std::uint64_t Scenario::shot_count() const {
  if (shots) return *shots;
  if (duration_s) return static_cast<std::uint64_t>(std::floor(setup.repetition_rate() * *duration_s));
  return 0;
}

analysis::Options Scenario::analysis_options() const {
  analysis::Options o;
  o.fit_window_m = analysis.fit_window_m;
  o.noise_window_m = analysis.noise_window_m;
  o.air_regions_m = analysis.air_regions_m;
  o.min_prominence_db = analysis.min_prominence_db;
  return o;
}

Scenario from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({"line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what()});
  }
  if (!doc.is_object()) throw ConfigError({"scenario must be a JSON object"});

  Reader r;
  Scenario s;
  const Path root;
  r.only(doc, {"name", "description", "seed", "shots", "duration_s", "scrambler", "group_index_display",
               "guard_s", "repetition_rate_hz", "dispersion_model", "link", "source", "stop_detector",
               "start_detector", "tac", "analysis"}, root);

  s.name = r.string(doc, "name", root, true).value_or("");
  s.description = r.string(doc, "description", root, false).value_or("");
  if (doc.contains("seed")) {
    if (doc["seed"].is_number_unsigned()) s.seed = doc["seed"].get<std::uint64_t>();
    else r.issues.push_back("seed must be an unsigned 64-bit integer");
  }
  if (doc.contains("shots") && !doc["shots"].is_null()) {
    if (doc["shots"].is_number_unsigned()) s.shots = doc["shots"].get<std::uint64_t>();
    else if (doc["shots"].is_number_integer()) s.shots = 0;  // negative: reported by validate
    else r.issues.push_back("shots must be an integer");
  }
  s.duration_s = r.number(doc, "duration_s", root, false);
  if (auto sc = r.string(doc, "scrambler", root, false)) {
    if (*sc == "on") s.setup.scrambler = true;
    else if (*sc == "off") s.setup.scrambler = false;
    else r.issues.push_back("scrambler must be \"on\" or \"off\"");
  }
  s.group_index_display = r.number_or(doc, "group_index_display", root, s.group_index_display);
  s.setup.guard_s = r.number_or(doc, "guard_s", root, s.setup.guard_s);
  s.setup.repetition_rate_hz = r.number(doc, "repetition_rate_hz", root, false);
  if (auto dm = r.string(doc, "dispersion_model", root, false)) {
    if (*dm == "transform_limited") s.setup.dispersion = photonics::DispersionModel::TransformLimited;
    else if (*dm == "source_linewidth") s.setup.dispersion = photonics::DispersionModel::SourceLinewidth;
    else r.issues.push_back("dispersion_model must be transform_limited or source_linewidth");
  }

  if (const json* l = r.object(doc, "link", root, true)) {
    const Path lp = root.key("link");
    r.only(*l, {"elements"}, lp);
    const Path ep = lp.key("elements");
    if (!l->contains("elements") || !(*l)["elements"].is_array()) {
      r.issues.push_back(ep.dotted + " must be an array");
    } else {
      const json& els = (*l)["elements"];
      for (std::size_t i = 0; i < els.size(); ++i) {
        if (!els[i].is_object()) {
          r.issues.push_back(ep.index(i).dotted + " must be an object");
          continue;
        }
        s.setup.plan.elements.push_back(read_element(r, els[i], ep.index(i)));
      }
    }
  }

  const json* tac = r.object(doc, "tac", root, true);
  if (tac) {
    const Path tp = root.key("tac");
    r.only(*tac, {"mode", "bin_width_s", "range_s", "start_delay_s", "extra_jitter_fwhm_s"}, tp);
    const auto mode = r.string(*tac, "mode", tp, true).value_or("");
    if (mode == "configuration_1") s.setup.tac.mode = detection::TacMode::Configuration1;
    else if (mode == "configuration_2") s.setup.tac.mode = detection::TacMode::Configuration2;
    else if (!mode.empty()) r.issues.push_back("tac.mode must be configuration_1 or configuration_2");
    s.setup.tac.bin_width_s = r.number(*tac, "bin_width_s", tp, true).value_or(0.0);
    s.setup.tac.range_s = r.number(*tac, "range_s", tp, true).value_or(0.0);
    s.setup.tac.start_delay_s = r.number_or(*tac, "start_delay_s", tp, 0.0);
    s.setup.tac.extra_jitter_fwhm_s = r.number_or(*tac, "extra_jitter_fwhm_s", tp, 0.0);
  }

  if (const json* src = r.object(doc, "source", root, true)) {
    const Path sp = root.key("source");
    r.only(*src, {"wavelength_m", "fwhm_s", "peak_power_w", "trigger_jitter_rms_s", "spectral_width_m",
                  "polarization_angle_rad"}, sp);
    auto& so = s.setup.source;
    so.wavelength_m = r.number_or(*src, "wavelength_m", sp, so.wavelength_m);
    so.fwhm_s = r.number(*src, "fwhm_s", sp, true).value_or(0.0);
    so.peak_power_w = r.number(*src, "peak_power_w", sp, true).value_or(0.0);
    const bool config2 = s.setup.tac.mode == detection::TacMode::Configuration2 && tac;
    so.trigger_jitter_rms_s = r.number(*src, "trigger_jitter_rms_s", sp, false).value_or(0.0);
    if (config2 && (!src->contains("trigger_jitter_rms_s") || (*src)["trigger_jitter_rms_s"].is_null()))
      r.issues.push_back("source.trigger_jitter_rms_s is required in configuration_2");
    so.spectral_width_m = r.number_or(*src, "spectral_width_m", sp, 0.0);
    so.polarization_angle_rad = r.number_or(*src, "polarization_angle_rad", sp, 0.0);
  }
  if (const json* d = r.object(doc, "stop_detector", root, true))
    s.setup.stop = read_detector(r, *d, root.key("stop_detector"));
  if (const json* d = r.object(doc, "start_detector", root, false))
    s.setup.start = read_detector(r, *d, root.key("start_detector"));

  if (const json* a = r.object(doc, "analysis", root, false)) {
    const Path ap = root.key("analysis");
    r.only(*a, {"fit_window_m", "noise_window_m", "air_regions_m", "min_prominence_db"}, ap);
    s.analysis.fit_window_m = r.window(*a, "fit_window_m", ap);
    s.analysis.noise_window_m = r.window(*a, "noise_window_m", ap);
    if (a->contains("air_regions_m") && !(*a)["air_regions_m"].is_null()) {
      const json& regions = (*a)["air_regions_m"];
      if (!regions.is_array()) {
        r.issues.push_back("analysis.air_regions_m must be an array of [start_m, end_m]");
      } else {
        for (std::size_t i = 0; i < regions.size(); ++i)
          if (auto w = r.window_value(regions[i], ap.key("air_regions_m").index(i))) s.analysis.air_regions_m.push_back(*w);
      }
    }
    s.analysis.min_prominence_db = r.number_or(*a, "min_prominence_db", ap, s.analysis.min_prominence_db);
  }
  s.calibrated = std::move(r.calibrated);

  // invariants too, minus those about fields that already failed to parse
  auto issues = std::move(r.issues);
  std::vector<std::string> bad;
  for (const auto& i : issues) bad.push_back(i.substr(0, i.find_first_of(" :")));
  for (auto& i : validate(s)) {
    const auto key = i.substr(0, i.find_first_of(" :"));
    if (std::find(bad.begin(), bad.end(), key) == bad.end()) issues.push_back(std::move(i));
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return s;
}

Scenario load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({path + ": cannot open file"});
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return from_json(ss.str());
  } catch (const ConfigError& e) {
    std::vector<std::string> issues;
    for (const auto& i : e.issues()) issues.push_back(path + ": " + i);
    throw ConfigError(std::move(issues));
  }
}

std::string to_json(const Scenario& s) {
  const Writer w(s.calibrated);
  ojson o;
  o["name"] = s.name;
  o["description"] = s.description;
  o["seed"] = s.seed;
  if (s.shots) o["shots"] = *s.shots;
  if (s.duration_s) o["duration_s"] = w.num(*s.duration_s, "/duration_s");
  o["scrambler"] = s.setup.scrambler ? "on" : "off";
  o["group_index_display"] = w.num(s.group_index_display, "/group_index_display");
  o["guard_s"] = w.num(s.setup.guard_s, "/guard_s");
  o["repetition_rate_hz"] = w.opt(s.setup.repetition_rate_hz, "/repetition_rate_hz");
  o["dispersion_model"] = s.setup.dispersion == photonics::DispersionModel::TransformLimited
                              ? "transform_limited" : "source_linewidth";

  ojson elements = ojson::array();
  for (std::size_t i = 0; i < s.setup.plan.elements.size(); ++i) {
    const std::string p = "/link/elements/" + std::to_string(i);
    ojson e;
    std::visit(
        [&](const auto& el) {
          using T = std::decay_t<decltype(el)>;
          if constexpr (std::is_same_v<T, link::FiberSegment>) {
            e["type"] = "fiber";
            e["length_m"] = w.num(el.length_m, p + "/length_m");
            e["attenuation_db_per_km"] = w.num(el.attenuation_db_per_km, p + "/attenuation_db_per_km");
            e["group_index"] = w.num(el.group_index, p + "/group_index");
            e["backscatter_db"] = w.num(el.backscatter_db, p + "/backscatter_db");
            e["dispersion_ps_per_nm_km"] = w.num(el.dispersion_ps_per_nm_km, p + "/dispersion_ps_per_nm_km");
            e["beat_length_m"] = w.opt(el.beat_length_m, p + "/beat_length_m");
            e["birefringence_axis_rad"] = w.num(el.birefringence_axis_rad, p + "/birefringence_axis_rad");
          } else if constexpr (std::is_same_v<T, link::Reflector>) {
            e["type"] = "reflector";
            e["reflectance_db"] = w.num(el.reflectance_db, p + "/reflectance_db");
          } else if constexpr (std::is_same_v<T, link::Splice>) {
            e["type"] = "splice";
            e["loss_db"] = w.num(el.loss_db, p + "/loss_db");
          } else if constexpr (std::is_same_v<T, link::AirGap>) {
            e["type"] = "air_gap";
            e["length_m"] = w.num(el.length_m, p + "/length_m");
            e["surface_reflectance_db"] = w.num(el.surface_reflectance_db, p + "/surface_reflectance_db");
            e["coupling_loss_db"] = w.num(el.coupling_loss_db, p + "/coupling_loss_db");
          } else {
            e["type"] = "fiber_end";
            e["termination"] = termination_name(el.termination);
            e["reflectance_db"] = w.opt(el.reflectance_db, p + "/reflectance_db");
          }
        },
        s.setup.plan.elements[i]);
    elements.push_back(std::move(e));
  }
  o["link"]["elements"] = std::move(elements);

  const auto& so = s.setup.source;
  ojson src;
  src["wavelength_m"] = w.num(so.wavelength_m, "/source/wavelength_m");
  src["fwhm_s"] = w.num(so.fwhm_s, "/source/fwhm_s");
  src["peak_power_w"] = w.num(so.peak_power_w, "/source/peak_power_w");
  src["trigger_jitter_rms_s"] = w.num(so.trigger_jitter_rms_s, "/source/trigger_jitter_rms_s");
  src["spectral_width_m"] = w.num(so.spectral_width_m, "/source/spectral_width_m");
  src["polarization_angle_rad"] = w.num(so.polarization_angle_rad, "/source/polarization_angle_rad");
  o["source"] = std::move(src);
  o["stop_detector"] = detector_json(w, s.setup.stop, "/stop_detector");
  o["start_detector"] = s.setup.start ? detector_json(w, *s.setup.start, "/start_detector") : ojson(nullptr);

  const auto& tac = s.setup.tac;
  ojson t;
  t["mode"] = tac.mode == detection::TacMode::Configuration1 ? "configuration_1" : "configuration_2";
  t["bin_width_s"] = w.num(tac.bin_width_s, "/tac/bin_width_s");
  t["range_s"] = w.num(tac.range_s, "/tac/range_s");
  t["start_delay_s"] = w.num(tac.start_delay_s, "/tac/start_delay_s");
  t["extra_jitter_fwhm_s"] = w.num(tac.extra_jitter_fwhm_s, "/tac/extra_jitter_fwhm_s");
  o["tac"] = std::move(t);

  ojson a;
  a["fit_window_m"] = window_json(s.analysis.fit_window_m);
  a["noise_window_m"] = window_json(s.analysis.noise_window_m);
  a["air_regions_m"] = ojson::array();
  for (const auto& r : s.analysis.air_regions_m) a["air_regions_m"].push_back(ojson::array({r.first, r.second}));
  a["min_prominence_db"] = w.num(s.analysis.min_prominence_db, "/analysis/min_prominence_db");
  o["analysis"] = std::move(a);
  return o.dump(2) + "\n";
}

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> issues;
  if (s.name.empty()) issues.push_back("name must be non-empty");
  if (s.shots.has_value() == s.duration_s.has_value())
    issues.push_back("exactly one of shots or duration_s is required");
  if (s.shots && *s.shots < 1) issues.push_back("shots must be >= 1");
  if (s.duration_s && !(*s.duration_s > 0)) issues.push_back("duration_s must be > 0");
  if (!(s.group_index_display > 1)) issues.push_back("group_index_display must be > 1");
  if (!(s.analysis.min_prominence_db > 0)) issues.push_back("analysis.min_prominence_db must be > 0");
  auto check = [&](const std::optional<analysis::Window>& w, const char* name) {
    if (w && !(w->second > w->first)) issues.push_back(std::string("analysis.") + name + " must have end > start");
  };
  check(s.analysis.fit_window_m, "fit_window_m");
  check(s.analysis.noise_window_m, "noise_window_m");
  for (std::size_t i = 0; i < s.analysis.air_regions_m.size(); ++i)
    if (!(s.analysis.air_regions_m[i].second > s.analysis.air_regions_m[i].first))
      issues.push_back("analysis.air_regions_m[" + std::to_string(i) + "] must have end > start");
  for (auto& i : detection::validate(s.setup)) issues.push_back(std::move(i));
  return issues;
}

std::string hash(const Scenario& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : to_json(s)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Diagnostics diagnose(const Scenario& s) {
  if (auto issues = validate(s); !issues.empty()) throw ConfigError(std::move(issues));
  Diagnostics d;
  const auto& setup = s.setup;
  d.round_trip_s = link::round_trip_time(setup.plan);
  d.max_repetition_rate_hz = link::max_repetition_rate(setup.plan, setup.guard_s);
  d.repetition_rate_hz = setup.repetition_rate();
  d.shots = s.shot_count();
  d.per_shot_probability = detection::Oracle(setup).per_shot_probability();

  char buf[256];
  if (d.per_shot_probability > 0.05) {
    std::snprintf(buf, sizeof buf,
                  "pile-up: per-shot stop probability %.3f > 0.05; returns late in the window are "
                  "suppressed by up to e^-p = %.3f",
                  d.per_shot_probability, std::exp(-d.per_shot_probability));
    d.warnings.emplace_back(buf);
  }

  const auto& src = setup.source;
  if (src.spectral_width_m > 0 && src.spectral_width_m < src.transform_limited_width_m()) {
    std::snprintf(buf, sizeof buf, "source.spectral_width_m below the transform limit %.3g m; the limit is used",
                  src.transform_limited_width_m());
    d.warnings.emplace_back(buf);
  }

  const photonics::LinkPath path(setup.plan, src.wavelength_m);
  const double baseline = units::quadrature_width(
      {src.fwhm_s, setup.stop.jitter_fwhm_s, units::rms_to_fwhm(setup.start_jitter_rms())});
  double worst = 0.0, worst_z = 0.0;
  for (const auto& r : link::compile(setup.plan, src.fwhm_s).reflections) {
    const double fwhm = photonics::broadened_fwhm(src, path.dispersion_at(r.z), setup.dispersion);
    const double added = std::sqrt(std::max(0.0, fwhm * fwhm - src.fwhm_s * src.fwhm_s));
    if (added > worst) {
      worst = added;
      worst_z = r.z;
    }
  }
  if (worst > baseline) {
    std::snprintf(buf, sizeof buf,
                  "dispersion-limited regime: %.0f ps of broadening at %.1f km exceeds the %.0f ps baseline FWHM",
                  worst * 1e12, worst_z / 1000.0, baseline * 1e12);
    d.warnings.emplace_back(buf);
  }
  return d;
}

}  // namespace psiotdr::scenario
