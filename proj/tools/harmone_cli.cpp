// harmone: data generation, drift injection, experiment runs and comparison.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "harmone/harness.hpp"
#include "harmone/report.hpp"

namespace fs = std::filesystem;
using namespace harmone;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

DecisionMap config_or_default(const std::string& path) {
  if (path.empty()) return {};
  try {
    return read_decision_map(path);
  } catch (const ValidationError& e) {
    throw UsageError(fmt::format("invalid config '{}': {} ({})", path, e.what(), e.field()));
  } catch (const ParseError& e) {
    throw UsageError(fmt::format("invalid config '{}': {}", path, e.what()));
  }
}

DriftSegment parse_segment(const std::string& text) {
  // start:end:scale:shift
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const auto c = text.find(':', pos);
    parts.push_back(text.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  if (parts.size() != 4) throw UsageError("segment must be start:end:scale:shift, got '" + text + "'");
  try {
    return {std::stoull(parts[0]), std::stoull(parts[1]), std::stod(parts[2]), std::stod(parts[3])};
  } catch (const std::exception&) {
    throw UsageError("segment must be start:end:scale:shift, got '" + text + "'");
  }
}

struct GenArgs {
  std::size_t length = SplitSizes{}.total();
  std::uint64_t seed = 42;
  double noise = SyntheticParams{}.noise_sigma;
  std::string out;
  bool check_split = false;
};

int cmd_gen_data(const GenArgs& a) {
  if (a.check_split && a.length < SplitSizes{}.total()) {
    throw UsageError(fmt::format("length {} is below the {}-step split", a.length, SplitSizes{}.total()));
  }
  if (a.length < kMinSyntheticLength) throw UsageError(fmt::format("--length must be >= {}", kMinSyntheticLength));
  if (!(a.noise >= 0.0)) throw UsageError("--noise must be >= 0");
  SyntheticParams p;
  p.noise_sigma = a.noise;
  save_series_csv(a.out, generate_synthetic(p, a.seed, a.length));
  std::cout << fmt::format("wrote {} readings to {}\n", a.length, a.out);
  return kOk;
}

struct DriftArgs {
  std::string in, out;
  std::vector<std::string> segments;
};

int cmd_inject_drift(const DriftArgs& a) {
  std::vector<DriftSegment> segs;
  for (const auto& s : a.segments) segs.push_back(parse_segment(s));
  if (segs.empty()) segs = to_absolute(default_drift_spec(), SplitSizes{}.test_start());
  const Series s = load_series_csv(a.in);
  try {
    validate_segments(segs, s.size());
  } catch (const SegmentError& e) {
    throw UsageError(e.what());
  }
  save_series_csv(a.out, inject_drift(s, segs));
  std::cout << fmt::format("applied {} drift segment(s), wrote {}\n", segs.size(), a.out);
  return kOk;
}

struct RunArgs {
  std::string approach, config, data, out_dir = "results";
  std::size_t reps = 5;
  std::optional<std::uint64_t> seed;
  std::uint64_t data_seed = 42;
  bool no_drift = false;
  bool wall_clock = false;
};

int cmd_run(const RunArgs& a) {
  const auto approach = approach_from_string(a.approach);
  if (!approach) throw UsageError("unknown approach '" + a.approach + "'");
  if (a.reps < 1) throw UsageError("--reps must be >= 1");
  const DecisionMap dm = config_or_default(a.config);

  ExperimentPlan plan;
  plan.approach = *approach;
  plan.goals = dm.goals;
  plan.costs = dm.costs;
  if (a.seed) plan.goals.seed = *a.seed;
  plan.repetitions = a.reps;
  plan.measure_wall_clock = a.wall_clock;
  if (a.no_drift) plan.drift_spec.clear();

  const Series series =
      a.data.empty() ? generate_synthetic({}, a.data_seed, plan.split.total()) : load_series_csv(a.data);
  const auto runs = run_experiment(plan, series);
  const fs::path summary = write_run_outputs(a.out_dir, runs);

  std::cout << kSummaryHeader << '\n';
  for (const auto& r : runs) std::cout << format_summary_row(r) << '\n';
  const MeanResult m = mean_of(runs);
  std::cout << fmt::format("mean {}: energy={:.1f} eu r2={:.4f} mse={:.2f} adaptations={:.1f} -> {}\n",
                           to_string(m.approach), m.total_energy, m.r2, m.mse, m.n_adaptations, summary.string());
  return kOk;
}

struct CompareArgs {
  std::vector<std::string> inputs;
  std::string config, out_dir = "report", baseline;
};

int cmd_compare(const CompareArgs& a) {
  if (a.inputs.size() < 2) throw UsageError("compare needs at least two --input summaries");
  const DecisionMap dm = config_or_default(a.config);
  std::vector<ResultSet> sets;
  for (const auto& in : a.inputs) sets.push_back(load_result_set(in));
  ComparisonReport rep;
  try {
    rep = compare(sets, dm.goals.e_ref, a.baseline);
  } catch (const SeedMismatchError& e) {
    throw UsageError(e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  {
    std::ofstream out(dir / "comparison.csv", std::ios::binary);
    write_report_csv(out, rep);
  }
  {
    std::ofstream out(dir / "cumulative_energy.csv", std::ios::binary);
    write_chart_csv(out, rep);
  }
  {
    std::ofstream out(dir / "cumulative_energy.svg", std::ios::binary);
    write_chart_svg(out, rep);
  }
  write_report_csv(std::cout, rep);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware self-adaptive forecasting experiments"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Write a synthetic flow series CSV");
  g->add_option("--length", gen.length, "Number of readings")->capture_default_str();
  g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  g->add_option("--noise", gen.noise, "AR(1) innovation sigma")->capture_default_str();
  g->add_option("--out", gen.out, "Output CSV path")->required();
  g->add_flag("--check-split", gen.check_split, "Fail if the series cannot hold the train/val/test split");

  DriftArgs drift;
  auto* d = app.add_subcommand("inject-drift", "Apply scale-and-shift drift segments to a series CSV");
  d->add_option("--in", drift.in, "Input series CSV")->required();
  d->add_option("--out", drift.out, "Output series CSV")->required();
  d->add_option("--segment", drift.segments,
                "start:end:scale:shift over absolute indices, repeatable (default: the two standard test segments)");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run one approach for several seeded repetitions");
  r->add_option("--approach", run.approach, "linear, linear-prt, kernel, kernel-prt, recurrent, recurrent-prt, "
                                            "switch, switch-prt or harmone")
      ->required();
  r->add_option("--config", run.config, "Decision map JSON (defaults when omitted)");
  r->add_option("--data", run.data, "Clean series CSV (synthetic when omitted)");
  r->add_option("--data-seed", run.data_seed, "Seed for the synthetic series when --data is omitted")
      ->capture_default_str();
  r->add_option("--out-dir", run.out_dir, "Directory for run artifacts")->capture_default_str();
  r->add_option("--reps", run.reps, "Repetitions")->capture_default_str();
  r->add_option("--seed", run.seed, "Base seed (overrides the config)");
  r->add_flag("--no-drift", run.no_drift, "Skip the default drift segments");
  r->add_flag("--wall-clock", run.wall_clock, "Measure wall-clock inference time");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Compare run results and draw the cumulative energy chart");
  c->add_option("--input", cmp.inputs, "Summary CSV written by `run`, repeatable")->required();
  c->add_option("--config", cmp.config, "Decision map JSON providing e_ref");
  c->add_option("--out-dir", cmp.out_dir, "Directory for the report")->capture_default_str();
  c->add_option("--baseline", cmp.baseline, "Approach used as the ratio denominator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_gen_data(gen);
    if (*d) return cmd_inject_drift(drift);
    if (*r) return cmd_run(run);
    if (*c) return cmd_compare(cmp);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
