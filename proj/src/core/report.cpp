#include "core/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "json.hpp"

namespace psiotdr::report {

namespace {

using ojson = nlohmann::ordered_json;

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string to_json(const analysis::Report& r) {
  ojson o;
  o["peaks"] = ojson::array();
  for (const auto& p : r.peaks) {
    ojson j;
    j["position_m"] = p.position_m;
    j["height_db"] = p.height_db;
    j["fwhm_m"] = p.fwhm_m;
    j["area_counts"] = p.area_counts;
    j["asymmetric"] = p.asymmetric;
    j["skewness"] = p.skewness;
    o["peaks"].push_back(std::move(j));
  }
  o["separations"] = ojson::array();
  for (const auto& s : r.separations) {
    ojson j;
    j["display_m"] = s.display_m;
    j["optical_m"] = s.optical_m;
    j["resolvable"] = s.resolvable;
    o["separations"].push_back(std::move(j));
  }
  o["delta_m"] = opt(r.delta_m);
  o["slope_db_per_km"] = opt(r.slope_db_per_km);
  o["slope_r2"] = opt(r.slope_r2);
  o["dynamic_range_db"] = opt(r.dynamic_range_db);
  o["noise_floor_db"] = opt(r.noise_floor_db);
  o["beat_length_m"] = opt(r.beat_length_m);
  if (r.accuracy) {
    ojson a;
    a["mean_m"] = r.accuracy->mean_m;
    a["std_m"] = r.accuracy->std_m;
    a["n"] = r.accuracy->n;
    a["seeds"] = r.accuracy->seeds;
    a["distances_m"] = r.accuracy->distances_m;
    o["accuracy"] = std::move(a);
  } else {
    o["accuracy"] = nullptr;
  }
  return o.dump(2) + "\n";
}

void write_trace_csv(const analysis::Trace& t, std::ostream& os) {
  os << "distance_m,level_db,counts\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    os << fmt("%.17g", t.distance_m[i]) << ',' << fmt("%.17g", t.level_db[i]) << ','
       << fmt("%.17g", t.counts[i]) << '\n';
}

void write_trace_svg(const analysis::Trace& t, std::ostream& os, const std::vector<analysis::Peak>& peaks) {
  constexpr double W = 900, H = 500, L = 70, R = 20, T = 20, B = 50;
  const double x0 = t.size() ? t.distance_m.front() : 0.0;
  const double x1 = t.size() ? t.distance_m.back() : 1.0;
  double y0 = t.floor_db(), y1 = y0 + 1.0;
  for (double v : t.level_db) y1 = std::max(y1, v);
  y1 = std::ceil(y1 + 1.0);
  y0 = std::floor(y0);
  const double xs = (W - L - R) / std::max(x1 - x0, 1e-12);
  const double ys = (H - T - B) / (y1 - y0);
  auto px = [&](double x) { return L + (x - x0) * xs; };
  auto py = [&](double y) { return H - B - (y - y0) * ys; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double x = x0 + (x1 - x0) * k / 5.0, y = y0 + (y1 - y0) * k / 5.0;
    os << "<text x=\"" << fmt("%.1f", px(x)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
       << fmt("%.4g", x) << "</text>\n"
       << "<text x=\"" << L - 6 << "\" y=\"" << fmt("%.1f", py(y) + 4) << "\" text-anchor=\"end\">" << fmt("%.3g", y)
       << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">distance (m)</text>\n"
     << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
     << ")\" text-anchor=\"middle\">level (dB, 5 log10 counts)</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < t.size(); ++i)
    os << fmt("%.2f", px(t.distance_m[i])) << ',' << fmt("%.2f", py(t.level_db[i])) << ' ';
  os << "\"/>\n";
  for (const auto& p : peaks)
    os << "<circle cx=\"" << fmt("%.2f", px(p.position_m)) << "\" cy=\"" << T + 6 << "\" r=\"3\" fill=\"#c0392b\"/>\n";
  os << "</svg>\n";
}

}  // namespace psiotdr::report
