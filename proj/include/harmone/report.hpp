#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "harmone/harness.hpp"

namespace harmone {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Run artifacts: <approach>.summary.csv, <approach>.rep<k>.events.jsonl,
// <approach>.rep<k>.metrics.csv

inline std::string summary_file(std::string_view approach) { return fmt::format("{}.summary.csv", approach); }
inline std::string events_file(std::string_view approach, std::size_t rep) {
  return fmt::format("{}.rep{}.events.jsonl", approach, rep);
}
inline std::string metrics_file(std::string_view approach, std::size_t rep) {
  return fmt::format("{}.rep{}.metrics.csv", approach, rep);
}

namespace detail {

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  return out;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    cells.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return cells;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line, std::string_view what) {
  T v{};
  if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError(fmt::format("bad {} value '{}'", what, text), line);
  return v;
}

inline std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open '" + p.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace detail

/// Writes every artifact of a run; returns the summary path.
inline fs::path write_run_outputs(const fs::path& out_dir, std::span<const RunResult> runs) {
  if (runs.empty()) throw std::invalid_argument("write_run_outputs: no runs");
  fs::create_directories(out_dir);
  const std::string_view name = to_string(runs.front().approach);
  for (const auto& r : runs) {
    auto ev = detail::open_out(out_dir / events_file(name, r.rep));
    r.events.write_jsonl(ev);
    auto mc = detail::open_out(out_dir / metrics_file(name, r.rep));
    write_metrics_csv(mc, r.per_interval);
  }
  const fs::path summary = out_dir / summary_file(name);
  auto out = detail::open_out(summary);
  write_summary_csv(out, runs);
  if (!out) throw Error("failed writing '" + summary.string() + "'");
  return summary;
}

// ---------------------------------------------------------------------------
// Loading results back

struct SummaryRow {
  std::string approach;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double total_energy = 0.0;
  double r2 = 0.0;
  double mse = 0.0;
  double mean_infer_cost = 0.0;
  double wall_ms_per_pred = 0.0;
  std::size_t n_adaptations = 0;
};

inline std::vector<SummaryRow> parse_summary_csv(const std::vector<std::string>& lines) {
  if (lines.empty() || lines.front() != kSummaryHeader) throw ParseError("expected summary header", 1);
  std::vector<SummaryRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    const auto c = detail::split_csv(lines[k]);
    const std::size_t ln = k + 1;
    if (c.size() != 9) throw ParseError("expected 9 columns", ln);
    SummaryRow r;
    r.approach = std::string(c[0]);
    r.rep = detail::parse_number<std::size_t>(c[1], ln, "rep");
    r.seed = detail::parse_number<std::uint64_t>(c[2], ln, "seed");
    r.total_energy = detail::parse_number<double>(c[3], ln, "total_energy_eu");
    r.r2 = detail::parse_number<double>(c[4], ln, "r2");
    r.mse = detail::parse_number<double>(c[5], ln, "mse");
    r.mean_infer_cost = detail::parse_number<double>(c[6], ln, "mean_infer_cost_eu");
    r.wall_ms_per_pred = detail::parse_number<double>(c[7], ln, "wall_ms_per_pred");
    r.n_adaptations = detail::parse_number<std::size_t>(c[8], ln, "n_adaptations");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("summary has no rows", 2);
  return rows;
}

/// The per-interval columns the report needs.
struct IntervalPoint {
  std::size_t interval = 0;
  double e_bar = 0.0;
  double cumulative_energy = 0.0;
};

inline std::vector<IntervalPoint> parse_metrics_csv(const std::vector<std::string>& lines) {
  if (lines.empty()) throw ParseError("empty metrics file", 1);
  const auto header = detail::split_csv(lines.front());
  auto column = [&](std::string_view name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(fmt::format("metrics header lacks '{}'", name), 1);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ci = column("interval"), ce = column("e_bar_i"), cc = column("cum_energy_eu");
  std::vector<IntervalPoint> out;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    const auto c = detail::split_csv(lines[k]);
    if (c.size() != header.size()) throw ParseError("column count differs from header", k + 1);
    out.push_back({detail::parse_number<std::size_t>(c[ci], k + 1, "interval"),
                   detail::parse_number<double>(c[ce], k + 1, "e_bar_i"),
                   detail::parse_number<double>(c[cc], k + 1, "cum_energy_eu")});
  }
  return out;
}

struct RepArtifacts {
  std::vector<IntervalPoint> intervals;
  double loop_energy = 0.0;
};

struct ResultSet {
  std::string approach;
  std::vector<SummaryRow> rows;
  std::vector<RepArtifacts> reps;  // parallel to rows

  std::set<std::uint64_t> seeds() const {
    std::set<std::uint64_t> s;
    for (const auto& r : rows) s.insert(r.seed);
    return s;
  }
};

/// Loads a summary CSV and the per-repetition files written next to it.
inline ResultSet load_result_set(const fs::path& summary_path) {
  ResultSet rs;
  rs.rows = parse_summary_csv(detail::read_lines(summary_path));
  rs.approach = rs.rows.front().approach;
  const fs::path dir = summary_path.parent_path();
  for (const auto& row : rs.rows) {
    if (row.approach != rs.approach) throw ParseError("summary mixes approaches");
    RepArtifacts a;
    a.intervals = parse_metrics_csv(detail::read_lines(dir / metrics_file(row.approach, row.rep)));
    std::ifstream ev(dir / events_file(row.approach, row.rep), std::ios::binary);
    if (!ev) throw Error("cannot open events for " + row.approach + " rep " + std::to_string(row.rep));
    for (const auto& e : EventLog::parse_jsonl(ev).events()) a.loop_energy += e.loop_energy;
    rs.reps.push_back(std::move(a));
  }
  return rs;
}

// ---------------------------------------------------------------------------
// Comparison

struct ReportRow {
  std::string approach;
  std::size_t runs = 0;
  double energy = 0.0;
  double r2 = 0.0;
  double mse = 0.0;
  double n_adaptations = 0.0;
  double loop_share = 0.0;
  double energy_ratio = 0.0;  // relative to the baseline row
  double r2_ratio = 0.0;
};

struct ChartSeries {
  std::string approach;
  std::vector<double> cumulative_energy;  // mean over repetitions, per interval
  std::vector<double> e_bar;
};

struct ComparisonReport {
  std::string baseline;
  std::vector<ReportRow> rows;
  std::vector<ChartSeries> chart;
  double e_ref = 0.0;
};

class SeedMismatchError : public Error {
 public:
  using Error::Error;
};

inline ComparisonReport compare(const std::vector<ResultSet>& inputs, double e_ref, std::string_view baseline = {}) {
  if (inputs.size() < 2) throw std::invalid_argument("compare needs at least two result sets");
  const auto seeds = inputs.front().seeds();
  for (const auto& in : inputs)
    if (in.seeds() != seeds) throw SeedMismatchError("result sets were produced with different seeds");

  std::size_t base = 0;
  if (!baseline.empty()) {
    const auto it = std::find_if(inputs.begin(), inputs.end(), [&](const auto& r) { return r.approach == baseline; });
    if (it == inputs.end()) throw std::invalid_argument(fmt::format("baseline '{}' is not among the inputs", baseline));
    base = static_cast<std::size_t>(it - inputs.begin());
  } else {
    for (std::size_t k = 0; k < inputs.size(); ++k)
      if (inputs[k].approach == to_string(Approach::RecurrentPRT)) {
        base = k;
        break;
      }
  }

  ComparisonReport rep;
  rep.baseline = inputs[base].approach;
  rep.e_ref = e_ref;
  for (const auto& in : inputs) {
    ReportRow row;
    row.approach = in.approach;
    row.runs = in.rows.size();
    const double n = static_cast<double>(row.runs);
    for (std::size_t k = 0; k < in.rows.size(); ++k) {
      const auto& r = in.rows[k];
      row.energy += r.total_energy / n;
      row.r2 += r.r2 / n;
      row.mse += r.mse / n;
      row.n_adaptations += static_cast<double>(r.n_adaptations) / n;
      if (r.total_energy > 0.0) row.loop_share += in.reps[k].loop_energy / r.total_energy / n;
    }
    rep.rows.push_back(std::move(row));

    ChartSeries cs;
    cs.approach = in.approach;
    std::size_t len = 0;
    for (const auto& a : in.reps) len = std::max(len, a.intervals.size());
    cs.cumulative_energy.assign(len, 0.0);
    cs.e_bar.assign(len, 0.0);
    for (const auto& a : in.reps) {
      if (a.intervals.size() != len) throw ParseError("repetitions have different interval counts");
      for (std::size_t i = 0; i < len; ++i) {
        cs.cumulative_energy[i] += a.intervals[i].cumulative_energy / n;
        cs.e_bar[i] += a.intervals[i].e_bar / n;
      }
    }
    rep.chart.push_back(std::move(cs));
  }
  const ReportRow& b = rep.rows[base];
  for (auto& row : rep.rows) {
    row.energy_ratio = row.energy / b.energy;
    row.r2_ratio = row.r2 / b.r2;
  }
  return rep;
}

inline constexpr std::string_view kReportHeader =
    "approach,runs,mean_total_energy_eu,mean_r2,mean_mse,mean_n_adaptations,loop_energy_share,baseline,"
    "energy_ratio,r2_ratio";

inline void write_report_csv(std::ostream& out, const ComparisonReport& r) {
  out << kReportHeader << '\n';
  for (const auto& row : r.rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", row.approach, row.runs, row.energy, row.r2, row.mse,
                       row.n_adaptations, row.loop_share, r.baseline, row.energy_ratio, row.r2_ratio);
  }
}

inline constexpr std::string_view kChartHeader = "approach,interval,mean_cum_energy_eu,mean_e_bar";

inline void write_chart_csv(std::ostream& out, const ComparisonReport& r) {
  out << kChartHeader << '\n';
  for (const auto& s : r.chart)
    for (std::size_t i = 0; i < s.cumulative_energy.size(); ++i)
      out << fmt::format("{},{},{},{}\n", s.approach, i, s.cumulative_energy[i], s.e_bar[i]);
}

/// Two stacked panels: mean cumulative energy per approach, then mean
/// per-interval normalized energy with a dashed line at e_ref.
inline void write_chart_svg(std::ostream& out, const ComparisonReport& r) {
  constexpr double W = 900, H = 700, left = 80, right = 180, top = 40, gap = 70;
  constexpr double ph = (H - top - gap - 50) / 2;
  constexpr double pw = W - left - right;
  static constexpr std::array<std::string_view, 9> palette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                           "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};
  std::size_t n = 1;
  double e_top = 1.0, bar_top = r.e_ref;
  for (const auto& s : r.chart) {
    n = std::max(n, s.cumulative_energy.size());
    for (double v : s.cumulative_energy) e_top = std::max(e_top, v);
    for (double v : s.e_bar) bar_top = std::max(bar_top, v);
  }
  bar_top = bar_top > 0.0 ? bar_top * 1.05 : 1.0;
  e_top *= 1.05;
  const double xs = n > 1 ? pw / static_cast<double>(n - 1) : pw;

  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      W, H, W, H);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto panel = [&](double y0, double ymax, std::string_view title, std::string_view ylabel, auto&& values) {
    out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"14\">{}</text>\n", left, y0 - 10, title);
    out << fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
                       left, y0, pw, ph);
    out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n", left - 5, y0 + 4, ymax);
    out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">0</text>\n", left - 5, y0 + ph);
    out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", left - 5, y0 + ph / 2, ylabel);
    out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">0</text>\n", left, y0 + ph + 15);
    out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", left + pw, y0 + ph + 15, n - 1);
    out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">interval</text>\n", left + pw / 2,
                       y0 + ph + 15);
    for (std::size_t k = 0; k < r.chart.size(); ++k) {
      const auto& v = values(r.chart[k]);
      std::string pts;
      for (std::size_t i = 0; i < v.size(); ++i) {
        pts += fmt::format("{:.2f},{:.2f} ", left + static_cast<double>(i) * xs, y0 + ph - v[i] / ymax * ph);
      }
      if (!pts.empty()) pts.pop_back();
      out << fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                         palette[k % palette.size()], pts);
    }
  };

  panel(top, e_top, "Cumulative energy (eu), mean over repetitions", "eu",
        [](const ChartSeries& s) -> const std::vector<double>& { return s.cumulative_energy; });
  const double y2 = top + ph + gap;
  panel(y2, bar_top, "Normalized interval energy", "E", [](const ChartSeries& s) -> const std::vector<double>& {
    return s.e_bar;
  });
  const double ry = y2 + ph - r.e_ref / bar_top * ph;
  out << fmt::format(
      "<line x1=\"{:.1f}\" y1=\"{:.2f}\" x2=\"{:.1f}\" y2=\"{:.2f}\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n",
      left, ry, left + pw, ry);
  out << fmt::format("<text x=\"{:.1f}\" y=\"{:.2f}\">e_ref = {}</text>\n", left + pw + 5, ry + 4, r.e_ref);

  for (std::size_t k = 0; k < r.chart.size(); ++k) {
    const double y = top + 10 + 18 * static_cast<double>(k);
    out << fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                       left + pw + 10, y, left + pw + 30, y, palette[k % palette.size()]);
    out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", left + pw + 35, y + 4, r.chart[k].approach);
  }
  out << "</svg>\n";
}

}  // namespace harmone
