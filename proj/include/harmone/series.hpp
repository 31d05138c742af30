#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "harmone/error.hpp"
#include "harmone/rng.hpp"

namespace harmone {

enum class SeriesOrigin { Csv, Synthetic };

/// Flow readings (vehicles per 5 minutes) at a fixed 5-minute cadence.
struct Series {
  std::vector<double> readings;
  SeriesOrigin origin = SeriesOrigin::Synthetic;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return readings.size(); }
};

inline constexpr std::size_t kStepsPerDay = 288;
inline constexpr std::size_t kStepsPerWeek = 2016;

struct SyntheticParams {
  double level = 200.0;
  double daily_amplitude = 120.0;
  // Relative amplitude of the weekly envelope.
  double weekly_amplitude = 0.03;
  double ar_phi = 0.7;
  double noise_sigma = 20.0;
};

inline constexpr std::size_t kMinSyntheticLength = 1445;

/// Daily sinusoid times a weekly envelope, plus AR(1) noise, clamped at 0.
inline Series generate_synthetic(const SyntheticParams& params, std::uint64_t seed, std::size_t length) {
  if (length < kMinSyntheticLength)
    throw ValidationError("length", "synthetic series needs at least " + std::to_string(kMinSyntheticLength) + " steps");
  Series s;
  s.origin = SeriesOrigin::Synthetic;
  s.seed = seed;
  s.readings.resize(length);
  Rng rng(seed);
  const double stationary = params.noise_sigma / std::sqrt(1.0 - params.ar_phi * params.ar_phi);
  double noise = params.noise_sigma > 0.0 ? stationary * rng.normal() : 0.0;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0) noise = params.ar_phi * noise + params.noise_sigma * rng.normal();
    const double tt = static_cast<double>(t);
    const double daily = params.level + params.daily_amplitude * std::sin(two_pi * tt / kStepsPerDay);
    const double weekly = 1.0 + params.weekly_amplitude * std::sin(two_pi * tt / kStepsPerWeek);
    s.readings[t] = std::max(0.0, daily * weekly + noise);
  }
  return s;
}

/// Half-open index range [start, end) transformed as a * x + b.
struct DriftSegment {
  std::size_t start = 0;
  std::size_t end = 0;
  double scale = 1.0;
  double shift = 0.0;

  bool operator==(const DriftSegment&) const = default;
};

inline void validate_segments(const std::vector<DriftSegment>& segments, std::size_t length) {
  std::size_t prev_end = 0;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    if (s.start >= s.end) throw SegmentError("drift segment " + std::to_string(k) + " is empty");
    if (s.end > length) throw SegmentError("drift segment " + std::to_string(k) + " runs past the series end");
    if (k > 0 && s.start < prev_end) throw SegmentError("drift segments overlap or are out of order");
    if (!std::isfinite(s.scale) || !std::isfinite(s.shift)) throw SegmentError("drift transform is not finite");
    prev_end = s.end;
  }
}

inline Series inject_drift(Series series, const std::vector<DriftSegment>& segments) {
  validate_segments(segments, series.size());
  for (const auto& seg : segments)
    for (std::size_t t = seg.start; t < seg.end; ++t)
      series.readings[t] = std::max(0.0, seg.scale * series.readings[t] + seg.shift);
  return series;
}

// ---------------------------------------------------------------------------
// CSV: header `timestamp,flow`, ISO-8601 timestamps, nonnegative decimal flow.

namespace detail {

inline bool looks_like_iso8601(std::string_view ts) {
  // YYYY-MM-DDTHH:MM at minimum.
  if (ts.size() < 16) return false;
  auto digit = [&](std::size_t i) { return ts[i] >= '0' && ts[i] <= '9'; };
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u, 11u, 12u, 14u, 15u})
    if (!digit(i)) return false;
  return ts[4] == '-' && ts[7] == '-' && (ts[10] == 'T' || ts[10] == ' ') && ts[13] == ':';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline Series parse_series_csv(std::istream& in) {
  Series s;
  s.origin = SeriesOrigin::Csv;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  ++line_no;
  if (detail::trim(line) != "timestamp,flow") throw ParseError("expected header 'timestamp,flow'", line_no);
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = detail::trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos)
      throw ParseError("expected two columns", line_no);
    const auto ts = detail::trim(row.substr(0, comma));
    const auto flow_text = detail::trim(row.substr(comma + 1));
    if (!detail::looks_like_iso8601(ts)) throw ParseError("malformed timestamp", line_no);
    double flow = 0.0;
    const auto [ptr, ec] = std::from_chars(flow_text.data(), flow_text.data() + flow_text.size(), flow);
    if (ec != std::errc{} || ptr != flow_text.data() + flow_text.size() || !std::isfinite(flow))
      throw ParseError("malformed flow value", line_no);
    if (flow < 0.0) throw NegativeFlowError(line_no);
    s.readings.push_back(flow);
  }
  return s;
}

inline Series load_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open series file '" + path + "'");
  return parse_series_csv(in);
}

/// Timestamp of step k, counted in 5-minute steps from 2024-01-01T00:00:00.
inline std::string step_timestamp(std::size_t k) {
  using namespace std::chrono;
  const auto start = sys_days{year{2024} / January / 1};
  const auto tp = start + minutes{5 * static_cast<long long>(k)};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const auto tod = tp - day;
  const auto h = duration_cast<hours>(tod);
  const auto m = duration_cast<minutes>(tod - h);
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:00", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), h.count(), m.count());
}

inline void write_series_csv(std::ostream& out, const Series& s) {
  out << "timestamp,flow\n";
  for (std::size_t k = 0; k < s.size(); ++k) out << step_timestamp(k) << ',' << fmt::format("{:.3f}", s.readings[k]) << '\n';
}

inline void save_series_csv(const std::string& path, const Series& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write series file '" + path + "'");
  write_series_csv(out, s);
  if (!out) throw Error("failed writing series file '" + path + "'");
}

}  // namespace harmone
