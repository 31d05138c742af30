#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "harmone/harness.hpp"

using namespace harmone;

namespace {

const Series& dataset() {
  static const Series s = generate_synthetic({}, 42, SplitSizes{}.total());
  return s;
}

ExperimentPlan plan_for(Approach a, std::size_t reps = 1) {
  ExperimentPlan p;
  p.approach = a;
  p.repetitions = reps;
  return p;
}

}  // namespace

// --- series IO ----------------------------------------------------------------

TEST(SeriesCsv, ThreeRows) {
  std::istringstream in("timestamp,flow\n2024-01-01T00:00:00,120\n2024-01-01T00:05:00,98\n2024-01-01T00:10:00,143\n");
  const Series s = parse_series_csv(in);
  EXPECT_EQ(s.readings, (std::vector<double>{120, 98, 143}));
  EXPECT_EQ(s.origin, SeriesOrigin::Csv);
}

TEST(SeriesCsv, NegativeFlowNamesLine) {
  std::istringstream in("timestamp,flow\n2024-01-01T00:00:00,120\n2024-01-01T00:05:00,-5\n");
  try {
    parse_series_csv(in);
    FAIL() << "expected NegativeFlowError";
  } catch (const NegativeFlowError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(SeriesCsv, MalformedRowsAreParseErrors) {
  const std::vector<std::string> bad = {
      "",
      "time,flow\n2024-01-01T00:00:00,1\n",
      "timestamp,flow\nyesterday,1\n",
      "timestamp,flow\n2024-01-01T00:00:00,abc\n",
      "timestamp,flow\n2024-01-01T00:00:00,1,2\n",
      "timestamp,flow\n2024-01-01T00:00:00\n",
      "timestamp,flow\n2024-01-01T00:00:00,nan\n",
  };
  for (const auto& text : bad) {
    std::istringstream in(text);
    EXPECT_THROW(parse_series_csv(in), ParseError) << text;
  }
  std::istringstream in("timestamp,flow\n2024-01-01T00:00:00,1\n2024-01-01T00:05:00,x\n");
  try {
    parse_series_csv(in);
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(SeriesCsv, FullSplitRoundTrip) {
  std::ostringstream out;
  write_series_csv(out, dataset());
  std::istringstream in(out.str());
  const Series back = parse_series_csv(in);
  ASSERT_EQ(back.size(), 15940u);
  EXPECT_EQ(back.size(), SplitSizes{}.total());
  for (std::size_t k = 0; k < back.size(); ++k) ASSERT_NEAR(back.readings[k], dataset().readings[k], 5e-4);
}

TEST(SeriesCsv, TimestampsAdvanceFiveMinutes) {
  EXPECT_EQ(step_timestamp(0), "2024-01-01T00:00:00");
  EXPECT_EQ(step_timestamp(1), "2024-01-01T00:05:00");
  EXPECT_EQ(step_timestamp(288), "2024-01-02T00:00:00");
  EXPECT_EQ(step_timestamp(288 * 31 + 13), "2024-02-01T01:05:00");
}

// --- synthesis ----------------------------------------------------------------

TEST(Synthetic, SameSeedSameSeries) {
  EXPECT_EQ(generate_synthetic({}, 7, 2000).readings, generate_synthetic({}, 7, 2000).readings);
  EXPECT_NE(generate_synthetic({}, 7, 2000).readings, generate_synthetic({}, 8, 2000).readings);
}

TEST(Synthetic, NoiseFreeIsPeriodic) {
  SyntheticParams p;
  p.noise_sigma = 0.0;
  const Series s = generate_synthetic(p, 1, 3 * 2016);
  for (std::size_t t = 0; t + 2016 < s.size(); ++t) ASSERT_NEAR(s.readings[t], s.readings[t + 2016], 1e-9);
  // Not periodic at the daily period alone.
  double worst = 0.0;
  for (std::size_t t = 0; t + 288 < s.size(); ++t) worst = std::max(worst, std::abs(s.readings[t] - s.readings[t + 288]));
  EXPECT_GT(worst, 1.0);
}

TEST(Synthetic, DailyAutocorrelation) {
  const auto& x = dataset().readings;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    den += (x[t] - mean) * (x[t] - mean);
    if (t + 288 < x.size()) num += (x[t] - mean) * (x[t + 288] - mean);
  }
  EXPECT_GT(num / den, 0.5);
}

TEST(Synthetic, NonNegativeAndMinimumLength) {
  SyntheticParams p;
  p.noise_sigma = 200.0;
  for (double v : generate_synthetic(p, 3, 5000).readings) ASSERT_GE(v, 0.0);
  EXPECT_THROW(generate_synthetic({}, 1, 1444), ValidationError);
}

// --- drift injection ------------------------------------------------------------

TEST(InjectDrift, IdentityTransform) {
  const Series s = generate_synthetic({}, 2, 2000);
  EXPECT_EQ(inject_drift(s, {{100, 900, 1.0, 0.0}}).readings, s.readings);
}

TEST(InjectDrift, ScaleAndShift) {
  Series s;
  s.readings.assign(20, 1.0);
  s.readings[10] = 3;
  s.readings[11] = 4;
  s.readings[12] = 5;
  const Series d = inject_drift(s, {{10, 13, 2.0, 5.0}});
  EXPECT_EQ(d.readings[10], 11.0);
  EXPECT_EQ(d.readings[11], 13.0);
  EXPECT_EQ(d.readings[12], 15.0);
  EXPECT_EQ(d.readings[9], 1.0);
  EXPECT_EQ(d.readings[13], 1.0);
}

TEST(InjectDrift, ClampsAtZero) {
  Series s;
  s.readings = {1, 2, 3};
  EXPECT_EQ(inject_drift(s, {{0, 3, 1.0, -2.5}}).readings, (std::vector<double>{0, 0, 0.5}));
}

TEST(InjectDrift, SecondSegmentReplaysFirst) {
  const SplitSizes split;
  const auto abs = to_absolute(default_drift_spec(), split.test_start());
  const Series d = inject_drift(dataset(), abs);
  const std::span<const double> r(d.readings);
  const auto edges = edges_from_range(r.first(split.train), 20);
  const Histogram h1 = estimate_histogram(r.subspan(abs[0].start, abs[0].end - abs[0].start), edges);
  const Histogram h2 = estimate_histogram(r.subspan(abs[1].start, abs[1].end - abs[1].start), edges);
  EXPECT_LT(kl_divergence(h2, h1), 0.02);
}

TEST(InjectDrift, InvalidSegments) {
  const Series s = generate_synthetic({}, 2, 2000);
  EXPECT_THROW(inject_drift(s, {{10, 10, 1, 0}}), SegmentError);
  EXPECT_THROW(inject_drift(s, {{10, 2001, 1, 0}}), SegmentError);
  EXPECT_THROW(inject_drift(s, {{10, 50, 1, 0}, {40, 60, 1, 0}}), SegmentError);
  EXPECT_THROW(inject_drift(s, {{100, 150, 1, 0}, {10, 60, 1, 0}}), SegmentError);
  EXPECT_THROW(inject_drift(s, {{10, 20, NAN, 0}}), SegmentError);
}

// --- scheduling -------------------------------------------------------------------

TEST(PeriodicRetrain, Schedule) {
  EXPECT_TRUE(should_periodic_retrain(3200, 3200));
  EXPECT_FALSE(should_periodic_retrain(0, 3200));
  EXPECT_FALSE(should_periodic_retrain(3199, 3200));
  std::size_t n = 0;
  for (std::size_t t = 1; t <= 14500; ++t) n += should_periodic_retrain(t, 3200);
  EXPECT_EQ(n, 4u);
}

TEST(Approaches, NamesRoundTrip) {
  for (Approach a : kAllApproaches) EXPECT_EQ(approach_from_string(to_string(a)), a);
  EXPECT_FALSE(approach_from_string("lstm").has_value());
  EXPECT_EQ(kAllApproaches.size(), 9u);
}

// --- runs ---------------------------------------------------------------------------

TEST(Run, StaticLinearEnergyIsClosedForm) {
  const auto r = run_once(plan_for(Approach::Linear), dataset(), 0);
  EXPECT_EQ(r.events.size(), 0u);
  EXPECT_EQ(r.n_adaptations, 0u);
  EXPECT_EQ(r.total_energy, 14500.0);
  EXPECT_EQ(r.mean_inference_cost, 1.0);
  EXPECT_EQ(r.per_interval.size(), 145u);
  EXPECT_EQ(r.per_interval.back().cumulative_energy, r.total_energy);
}

TEST(Run, StaticEnergyOrdering) {
  const EnergyCostModel c;
  double prev = 0.0;
  for (Approach a : {Approach::Linear, Approach::Kernel, Approach::Recurrent}) {
    const auto r = run_once(plan_for(a), dataset(), 0);
    EXPECT_EQ(r.total_energy, 14500.0 * c.infer(*traits(a).static_family));
    EXPECT_GT(r.total_energy, prev);
    prev = r.total_energy;
  }
}

TEST(Run, PeriodicRetrainAddsFourTrainCosts) {
  const EnergyCostModel c;
  for (auto [base, prt] : {std::pair{Approach::Linear, Approach::LinearPRT}, {Approach::Kernel, Approach::KernelPRT}}) {
    const auto a = run_once(plan_for(base), dataset(), 0);
    const auto b = run_once(plan_for(prt), dataset(), 0);
    EXPECT_EQ(b.events.count(EventKind::Retrain), 4u);
    EXPECT_EQ(b.n_adaptations, 4u);
    EXPECT_EQ(b.total_energy, a.total_energy + 4 * c.train(*traits(base).static_family));
    for (const auto& e : b.events.events()) EXPECT_EQ(e.trigger, Trigger::Periodic);
  }
}

TEST(Run, RecurrentPeriodicHasFourRetrains) {
  const auto r = run_once(plan_for(Approach::RecurrentPRT), dataset(), 0);
  EXPECT_EQ(r.events.count(EventKind::Retrain), 4u);
  EXPECT_EQ(r.events.size(), 4u);
  EXPECT_EQ(r.total_energy, 14500.0 * 12 + 4 * 6000.0);
}

TEST(Run, HarmonEIsDeterministic) {
  const auto a = run_once(plan_for(Approach::HarmonE), dataset(), 1);
  const auto b = run_once(plan_for(Approach::HarmonE), dataset(), 1);
  EXPECT_EQ(a.events.to_jsonl(), b.events.to_jsonl());
  EXPECT_EQ(format_summary_row(a), format_summary_row(b));
  EXPECT_EQ(a.total_energy, b.total_energy);
  EXPECT_EQ(a.r2, b.r2);
}

TEST(Run, HarmonEAccountingInvariants) {
  const auto r = run_once(plan_for(Approach::HarmonE), dataset(), 0);
  const EnergyCostModel c;
  EXPECT_EQ(r.events.size(), r.per_interval.size());
  EXPECT_EQ(r.loop_energy, 0.5 * 145);
  EXPECT_DOUBLE_EQ(r.inference_energy + r.training_energy + r.loop_energy, r.total_energy);
  EXPECT_EQ(r.per_interval.back().cumulative_energy, r.total_energy);

  std::size_t adaptations = 0;
  double train_energy = 0.0;
  for (const auto& e : r.events.events()) {
    if (e.kind == EventKind::Switch || e.kind == EventKind::Retrain || e.kind == EventKind::VersionReuse) ++adaptations;
    EXPECT_EQ(e.loop_energy, 0.5);
  }
  EXPECT_EQ(r.n_adaptations, adaptations);
  // Retrains keep the family, so every retrain is charged the serving family's cost.
  for (std::size_t k = 0; k < r.per_interval.size(); ++k) {
    const auto& e = r.events.events()[k];
    if (e.kind != EventKind::Retrain) continue;
    const auto& m = r.per_interval[k].metrics;
    const double per_step = m.e_i / 100.0;
    for (Family f : kAllFamilies)
      if (c.infer(f) == per_step) train_energy += c.train(f);
  }
  EXPECT_EQ(r.training_energy, train_energy);
}

TEST(Run, HarmonEEnergyStaysUnderCeilingAfterWarmup) {
  const auto r = run_once(plan_for(Approach::HarmonE), dataset(), 0);
  const SustainabilityGoals g;
  for (std::size_t k = 5; k < r.per_interval.size(); ++k) EXPECT_LE(r.per_interval[k].metrics.e_bar_i, g.tau_max());
}

TEST(Run, SwitchNeverRetrainsOrReuses) {
  const auto r = run_once(plan_for(Approach::Switch), dataset(), 0);
  EXPECT_EQ(r.events.count(EventKind::Retrain), 0u);
  EXPECT_EQ(r.events.count(EventKind::VersionReuse), 0u);
  const auto p = run_once(plan_for(Approach::SwitchPRT), dataset(), 0);
  EXPECT_EQ(p.events.count(EventKind::VersionReuse), 0u);
  std::size_t periodic = 0;
  for (const auto& e : p.events.events()) periodic += e.kind == EventKind::Retrain && e.trigger == Trigger::Periodic;
  EXPECT_EQ(periodic, 4u);
  EXPECT_EQ(p.events.count(EventKind::Retrain), 4u);
}

TEST(Run, NoDriftRunIsCalm) {
  auto p = plan_for(Approach::HarmonE);
  p.drift_spec.clear();
  const auto r = run_once(p, dataset(), 0);
  EXPECT_EQ(r.events.count(EventKind::Retrain), 0u);
}

TEST(Run, RepetitionsUseConsecutiveSeeds) {
  auto p = plan_for(Approach::Linear, 3);
  p.goals.seed = 100;
  const auto runs = run_experiment(p, dataset());
  ASSERT_EQ(runs.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(runs[k].seed, 100 + k);
    EXPECT_EQ(runs[k].rep, k);
  }
  const auto m = mean_of(runs);
  EXPECT_EQ(m.runs, 3u);
  EXPECT_EQ(m.total_energy, 14500.0);
}

TEST(Run, PlanValidation) {
  auto p = plan_for(Approach::Linear, 0);
  EXPECT_THROW(run_once(p, dataset(), 0), ValidationError);
  p = plan_for(Approach::Linear);
  p.drift_spec = {{14000, 15000, 1, 0}};
  EXPECT_THROW(run_once(p, dataset(), 0), SegmentError);
  Series short_series = generate_synthetic({}, 1, 2000);
  EXPECT_THROW(run_once(plan_for(Approach::Linear), short_series, 0), TooShortError);
}

TEST(Run, WallClockIsOptIn) {
  auto p = plan_for(Approach::Linear);
  EXPECT_EQ(run_once(p, dataset(), 0).wall_ms_per_pred, 0.0);
  p.measure_wall_clock = true;
  EXPECT_GT(run_once(p, dataset(), 0).wall_ms_per_pred, 0.0);
}

TEST(SummaryCsv, Format) {
  const auto r = run_once(plan_for(Approach::Linear), dataset(), 0);
  std::ostringstream out;
  write_summary_csv(out, std::vector<RunResult>{r});
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "approach,rep,seed,total_energy_eu,r2,mse,mean_infer_cost_eu,wall_ms_per_pred,n_adaptations");
  EXPECT_EQ(text.find("linear,0,42,14500,"), text.find('\n') + 1);
}
