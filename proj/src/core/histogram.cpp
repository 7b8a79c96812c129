#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "core/detection.hpp"

namespace psiotdr::detection {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw FormatError("histogram line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(const std::string& text, std::size_t line) {
  T v{};
  const char* b = text.data();
  const char* e = b + text.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e) fail(line, "bad number '" + text + "'");
  return v;
}

std::pair<std::string, std::string> split(const std::string& row, std::size_t line) {
  const auto comma = row.find(',');
  if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos)
    fail(line, "expected two comma-separated fields");
  return {row.substr(0, comma), row.substr(comma + 1)};
}

}  // namespace

void write_csv(const Histogram& h, std::ostream& os) {
  os << "bin_width_s," << fmt(h.bin_width_s) << '\n'
     << "origin_s," << fmt(h.origin_s) << '\n'
     << "shots," << h.shots << '\n'
     << "seed," << h.seed << '\n'
     << "scenario_hash," << h.scenario_hash << '\n'
     << "bin_index,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) os << i << ',' << h.counts[i] << '\n';
}

Histogram read_csv(std::istream& is) {
  Histogram h;
  std::string row;
  std::size_t line = 0;
  auto next = [&](const char* key) {
    ++line;
    if (!std::getline(is, row)) fail(line, std::string("missing '") + key + "' row");
    if (!row.empty() && row.back() == '\r') row.pop_back();
    auto [k, v] = split(row, line);
    if (k != key) fail(line, "expected '" + std::string(key) + "', got '" + k + "'");
    return v;
  };
  h.bin_width_s = parse_number<double>(next("bin_width_s"), line);
  if (!(h.bin_width_s > 0)) fail(line, "bin_width_s must be > 0");
  h.origin_s = parse_number<double>(next("origin_s"), line);
  h.shots = parse_number<std::uint64_t>(next("shots"), line);
  h.seed = parse_number<std::uint64_t>(next("seed"), line);
  h.scenario_hash = next("scenario_hash");
  if (next("bin_index") != "count") fail(line, "expected header 'bin_index,count'");

  std::uint64_t sum = 0;
  while (std::getline(is, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    auto [k, v] = split(row, line);
    const auto idx = parse_number<std::size_t>(k, line);
    if (idx != h.counts.size()) fail(line, "bin_index out of sequence");
    h.counts.push_back(parse_number<std::uint64_t>(v, line));
    sum += h.counts.back();
  }
  if (h.counts.empty()) fail(line, "no bins");
  if (sum > h.shots) fail(line, "total counts exceed shots");
  return h;
}

}  // namespace psiotdr::detection
