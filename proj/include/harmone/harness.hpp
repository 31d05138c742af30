#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "harmone/analyzer.hpp"
#include "harmone/energy.hpp"
#include "harmone/executor.hpp"
#include "harmone/forecasting.hpp"
#include "harmone/knowledge_base.hpp"
#include "harmone/monitor.hpp"
#include "harmone/planner.hpp"
#include "harmone/series.hpp"

namespace harmone {

enum class Approach { Linear, LinearPRT, Kernel, KernelPRT, Recurrent, RecurrentPRT, Switch, SwitchPRT, HarmonE };

inline constexpr std::array<Approach, 9> kAllApproaches{
    Approach::Linear,    Approach::LinearPRT, Approach::Kernel, Approach::KernelPRT, Approach::Recurrent,
    Approach::RecurrentPRT, Approach::Switch, Approach::SwitchPRT, Approach::HarmonE};

inline std::string_view to_string(Approach a) noexcept {
  switch (a) {
    case Approach::Linear: return "linear";
    case Approach::LinearPRT: return "linear-prt";
    case Approach::Kernel: return "kernel";
    case Approach::KernelPRT: return "kernel-prt";
    case Approach::Recurrent: return "recurrent";
    case Approach::RecurrentPRT: return "recurrent-prt";
    case Approach::Switch: return "switch";
    case Approach::SwitchPRT: return "switch-prt";
    case Approach::HarmonE: return "harmone";
  }
  return "?";
}

inline std::optional<Approach> approach_from_string(std::string_view s) noexcept {
  for (Approach a : kAllApproaches)
    if (to_string(a) == s) return a;
  return std::nullopt;
}

struct ApproachTraits {
  std::optional<Family> static_family;  // set for single-model baselines
  bool periodic = false;                // periodic retraining
  bool loop = false;                    // runs the adaptation loop
  bool drift_tactics = false;           // drift may reuse versions or retrain
};

inline ApproachTraits traits(Approach a) noexcept {
  switch (a) {
    case Approach::Linear: return {Family::Linear, false, false, false};
    case Approach::LinearPRT: return {Family::Linear, true, false, false};
    case Approach::Kernel: return {Family::Kernel, false, false, false};
    case Approach::KernelPRT: return {Family::Kernel, true, false, false};
    case Approach::Recurrent: return {Family::Recurrent, false, false, false};
    case Approach::RecurrentPRT: return {Family::Recurrent, true, false, false};
    case Approach::Switch: return {std::nullopt, false, true, false};
    case Approach::SwitchPRT: return {std::nullopt, true, true, false};
    case Approach::HarmonE: return {std::nullopt, false, true, true};
  }
  return {};
}

struct SplitSizes {
  std::size_t train = 1200;
  std::size_t val = 240;
  std::size_t test = 14500;

  std::size_t total() const noexcept { return train + val + test; }
  std::size_t test_start() const noexcept { return train + val; }
};

/// Default double drift: the same scale-and-shift applied to two test
/// windows, so the second one replays the first. Offsets are test-relative.
inline std::vector<DriftSegment> default_drift_spec() {
  return {{4000, 6000, 1.4, 30.0}, {10000, 12000, 1.4, 30.0}};
}

struct ExperimentPlan {
  Approach approach = Approach::HarmonE;
  SplitSizes split;
  std::size_t prt_period = 3200;
  std::vector<DriftSegment> drift_spec = default_drift_spec();
  SustainabilityGoals goals;
  EnergyCostModel costs;
  TrainOptions train_options;
  std::size_t repetitions = 5;
  bool measure_wall_clock = false;
};

inline void validate(const ExperimentPlan& plan) {
  if (plan.repetitions < 1) throw ValidationError("repetitions", "must be >= 1");
  if (plan.prt_period < 1) throw ValidationError("prt_period", "must be >= 1");
  if (plan.split.train < kRetrainWindow) throw ValidationError("split.train", "must cover the retraining window");
  if (plan.split.test < 1) throw ValidationError("split.test", "must be >= 1");
  validate(plan.goals);
  validate(plan.costs);
  validate_segments(plan.drift_spec, plan.split.test);
}

struct RunResult {
  Approach approach = Approach::HarmonE;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double total_energy = 0.0;
  double r2 = 0.0;
  double mse = 0.0;
  double mean_inference_cost = 0.0;
  double wall_ms_per_pred = 0.0;
  std::size_t n_adaptations = 0;
  EventLog events;
  std::vector<MetricsRow> per_interval;

  // Energy split by charge kind; these sum to total_energy.
  double inference_energy = 0.0;
  double training_energy = 0.0;
  double loop_energy = 0.0;
  double e_max = 0.0;
};

inline bool should_periodic_retrain(std::size_t t, std::size_t period) noexcept {
  return period > 0 && t > 0 && t % period == 0;
}

/// Shifts test-relative segments to absolute series indices.
inline std::vector<DriftSegment> to_absolute(const std::vector<DriftSegment>& spec, std::size_t offset) {
  std::vector<DriftSegment> out = spec;
  for (auto& s : out) {
    s.start += offset;
    s.end += offset;
  }
  return out;
}

namespace detail {

inline ModelScoreBoard cold_start_board(const ModelRepository& repo, std::span<const double> readings,
                                        const SplitSizes& split, double e_max, const SustainabilityGoals& goals,
                                        const EnergyCostModel& costs, std::string& most_accurate) {
  ModelScoreBoard board;
  double best_r2 = -std::numeric_limits<double>::infinity();
  for (const auto& [slot, entry] : repo.slots()) {
    std::vector<double> y, yhat;
    for (std::size_t t = split.train; t < split.test_start(); ++t) {
      y.push_back(readings[t]);
      yhat.push_back(predict(entry.model, window_before<kLag>(readings, t)));
    }
    double r2 = 0.0;
    try {
      r2 = r_squared(y, yhat);
    } catch (const DegenerateError&) {
    }
    const double e_bar = charge(costs, OpKind::Infer, entry.model.family, goals.interval_len) / e_max;
    const double s = performance_score(clamp01(r2), clamp01(e_bar), goals.beta);
    board.entries.push_back({slot, s, costs.infer(entry.model.family)});
    if (r2 > best_r2) {
      best_r2 = r2;
      most_accurate = slot;
    }
  }
  return board;
}

}  // namespace detail

/// One seeded repetition over the test stream.
inline RunResult run_once(const ExperimentPlan& plan, const Series& series, std::size_t rep) {
  validate(plan);
  const SplitSizes& split = plan.split;
  if (series.size() < split.total()) {
    throw TooShortError("series has " + std::to_string(series.size()) + " readings, split needs " +
                        std::to_string(split.total()));
  }
  const ApproachTraits tr = traits(plan.approach);
  SustainabilityGoals goals = plan.goals;
  goals.seed = plan.goals.seed + rep;
  const EnergyCostModel& costs = plan.costs;
  const std::size_t L = goals.interval_len;
  const std::size_t test_start = split.test_start();

  const Series drifted = inject_drift(series, to_absolute(plan.drift_spec, test_start));
  const std::span<const double> readings(drifted.readings);
  const auto train_span = readings.first(split.train);

  const std::vector<double> edges = edges_from_range(train_span, goals.histogram_bins);
  const Histogram base_hist = estimate_histogram(train_span, edges);
  const auto training_set = make_supervised<kLag>(train_span);

  ModelRepository repo;
  for (Family f : kAllFamilies) {
    if (tr.static_family && *tr.static_family != f) continue;
    TrainedModel m = train(f, training_set, derive_seed(goals.seed, static_cast<std::uint64_t>(f)),
                           plan.train_options, {}, Segment{0, split.train});
    repo.put(std::string(to_string(f)), {std::move(m), base_hist});
  }
  VersionedModelRepository vmr(goals.vmr_capacity);
  const double e_max = calibrate_max_interval_energy(training_set.size(), L, costs);

  ModelScoreBoard board;
  std::string initial_slot = tr.static_family ? std::string(to_string(*tr.static_family)) : std::string();
  if (tr.loop) board = detail::cold_start_board(repo, readings, split, e_max, goals, costs, initial_slot);
  board.active = initial_slot;
  DeploymentState deployment{repo.at(initial_slot).model, repo.at(initial_slot).train_histogram, initial_slot, 0};

  RunResult result;
  result.approach = plan.approach;
  result.rep = rep;
  result.seed = goals.seed;
  result.e_max = e_max;

  EnergyMeter meter;
  DataRepository data;
  data.reserve(split.test);
  ThresholdState threshold = ThresholdState::initial(goals);
  Rng planner_rng(derive_seed(goals.seed, 0xE9510));
  const PlannerPolicy policy{tr.drift_tactics};
  std::vector<double> y_true, y_pred;
  y_true.reserve(split.test);
  y_pred.reserve(split.test);
  double wall_seconds = 0.0;
  std::optional<double> static_ema;

  auto context = [&](std::size_t abs_t) {
    return ExecutionContext{repo, vmr, readings.first(abs_t), edges, costs, goals, plan.train_options, abs_t};
  };

  for (std::size_t t = 0; t < split.test; ++t) {
    const std::size_t abs_t = test_start + t;
    const std::size_t interval = t / L;

    if (tr.periodic && should_periodic_retrain(t, plan.prt_period)) {
      const AdaptationAction action{ActionKind::RetrainCurrent, {}, Trigger::Periodic, interval, "periodic schedule"};
      auto ctx = context(abs_t);
      ExecutionResult r = execute(action, deployment, ctx);
      deployment = std::move(r.deployment);
      meter.add(OpKind::Train, r.energy);
      result.events.log_event(std::move(r.event));
      board.active = deployment.slot;
    }

    const LagWindow window = window_before<kLag>(readings, abs_t);
    double yhat;
    if (plan.measure_wall_clock) {
      const auto t0 = std::chrono::steady_clock::now();
      yhat = predict(deployment.active_model, window);
      wall_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else {
      yhat = predict(deployment.active_model, window);
    }
    const double e = meter.add(OpKind::Infer, charge(costs, OpKind::Infer, deployment.active_model.family, 1));
    data.record_observation(t, readings[abs_t], yhat, deployment.active_model.model_id, e);
    y_true.push_back(readings[abs_t]);
    y_pred.push_back(yhat);

    const bool interval_end = (t + 1) % L == 0 || t + 1 == split.test;
    if (!interval_end) continue;

    // Monitor.
    const std::size_t begin = interval * L;
    const std::size_t drift_window = std::min(split.train, abs_t + 1);
    MonitorInputs in;
    in.records = data.slice(begin, t + 1);
    in.recent_truth = readings.subspan(abs_t + 1 - drift_window, drift_window);
    in.reference = &deployment.active_reference;
    in.e_max = e_max;
    in.prior_ema = tr.loop ? std::optional<double>(board.at(deployment.slot).ema) : static_ema;
    in.previous = result.per_interval.empty() ? nullptr : &result.per_interval.back().metrics;
    const IntervalMetrics m = aggregate_interval(interval, in, goals);
    const std::string served_by = deployment.active_model.model_id;
    const double tau_used = threshold.tau_e;

    if (!tr.loop) {
      static_ema = m.ema_s_i;
    } else {
      board.at(deployment.slot).ema = m.ema_s_i;
      const double loop_eu = meter.add(OpKind::Loop, charge_loop(costs, 1));

      // Analyze.
      const auto uncertainties = detect(m, goals, threshold);
      threshold = update_energy_threshold(std::move(threshold), interval, m.e_bar_i, goals);

      // Plan.
      const Histogram current = estimate_histogram(in.recent_truth, edges);
      const AdaptationAction action = harmone::plan(uncertainties, board, current, vmr, goals, planner_rng, interval, policy);

      // Execute.
      if (action.kind != ActionKind::NoOp) {
        auto ctx = context(abs_t + 1);
        ExecutionResult r = execute(action, deployment, ctx);
        deployment = std::move(r.deployment);
        meter.add(OpKind::Train, r.energy);
        r.event.loop_energy = loop_eu;
        result.events.log_event(std::move(r.event));
        board.active = deployment.slot;
        board.last_adaptation = interval;
      } else {
        AdaptationEvent ev;
        ev.interval = interval;
        ev.kind = threshold.tau_e != tau_used ? EventKind::ThresholdUpdate : EventKind::NoAction;
        ev.from_model = served_by;
        ev.to_model = served_by;
        ev.detail = fmt::format("tau_e {:.6f} -> {:.6f}", tau_used, threshold.tau_e);
        ev.loop_energy = loop_eu;
        result.events.log_event(std::move(ev));
      }
    }
    result.per_interval.push_back({m, tau_used, served_by, meter.total()});
  }

  result.total_energy = meter.total();
  result.inference_energy = meter.of(OpKind::Infer);
  result.training_energy = meter.of(OpKind::Train);
  result.loop_energy = meter.of(OpKind::Loop);
  result.r2 = r_squared(y_true, y_pred);
  result.mse = mean_squared_error(y_true, y_pred);
  result.mean_inference_cost = result.inference_energy / static_cast<double>(split.test);
  result.wall_ms_per_pred = plan.measure_wall_clock ? 1000.0 * wall_seconds / static_cast<double>(split.test) : 0.0;
  result.n_adaptations = result.events.adaptations();
  return result;
}

/// All repetitions of a plan, seeds goals.seed + 0 .. repetitions - 1.
inline std::vector<RunResult> run_experiment(const ExperimentPlan& plan, const Series& series) {
  std::vector<RunResult> out;
  out.reserve(plan.repetitions);
  for (std::size_t rep = 0; rep < plan.repetitions; ++rep) out.push_back(run_once(plan, series, rep));
  return out;
}

struct MeanResult {
  Approach approach = Approach::HarmonE;
  std::size_t runs = 0;
  double total_energy = 0.0;
  double r2 = 0.0;
  double mse = 0.0;
  double mean_inference_cost = 0.0;
  double n_adaptations = 0.0;
  double loop_energy = 0.0;
};

inline MeanResult mean_of(std::span<const RunResult> runs) {
  MeanResult m;
  if (runs.empty()) return m;
  m.approach = runs.front().approach;
  m.runs = runs.size();
  for (const auto& r : runs) {
    m.total_energy += r.total_energy;
    m.r2 += r.r2;
    m.mse += r.mse;
    m.mean_inference_cost += r.mean_inference_cost;
    m.n_adaptations += static_cast<double>(r.n_adaptations);
    m.loop_energy += r.loop_energy;
  }
  const double n = static_cast<double>(runs.size());
  m.total_energy /= n;
  m.r2 /= n;
  m.mse /= n;
  m.mean_inference_cost /= n;
  m.n_adaptations /= n;
  m.loop_energy /= n;
  return m;
}

// ---------------------------------------------------------------------------
// Summary CSV

inline constexpr std::string_view kSummaryHeader =
    "approach,rep,seed,total_energy_eu,r2,mse,mean_infer_cost_eu,wall_ms_per_pred,n_adaptations";

inline std::string format_summary_row(const RunResult& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{}", to_string(r.approach), r.rep, r.seed, r.total_energy, r.r2, r.mse,
                     r.mean_inference_cost, r.wall_ms_per_pred, r.n_adaptations);
}

inline void write_summary_csv(std::ostream& out, std::span<const RunResult> runs) {
  out << kSummaryHeader << '\n';
  for (const auto& r : runs) out << format_summary_row(r) << '\n';
}

}  // namespace harmone
