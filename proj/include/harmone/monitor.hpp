#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include <fmt/format.h>

#include "harmone/energy.hpp"
#include "harmone/error.hpp"
#include "harmone/histogram.hpp"
#include "harmone/knowledge_base.hpp"

namespace harmone {

/// Coefficient of determination 1 - SS_res / SS_tot.
inline double r_squared(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("r_squared: length mismatch");
  if (y_true.empty()) throw DegenerateError("r_squared: no samples");
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= static_cast<double>(y_true.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < y_true.size(); ++k) {
    ss_res += (y_true[k] - y_pred[k]) * (y_true[k] - y_pred[k]);
    ss_tot += (y_true[k] - mean) * (y_true[k] - mean);
  }
  if (!(ss_tot > 0.0)) throw DegenerateError("r_squared: ground truth has zero variance");
  return 1.0 - ss_res / ss_tot;
}

inline double mean_squared_error(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) throw std::invalid_argument("mse: bad lengths");
  double acc = 0.0;
  for (std::size_t k = 0; k < y_true.size(); ++k) acc += (y_true[k] - y_pred[k]) * (y_true[k] - y_pred[k]);
  return acc / static_cast<double>(y_true.size());
}

/// S = beta * A + (1 - beta) * (1 - E). Callers clamp E to [0, 1] first.
inline double performance_score(double accuracy, double e_bar, double beta) noexcept {
  return beta * accuracy + (1.0 - beta) * (1.0 - e_bar);
}

/// gamma * S + (1 - gamma) * previous; the first interval seeds the EMA with S.
inline double update_ema(std::optional<double> previous, double score, double gamma) noexcept {
  if (!previous) return score;
  return gamma * score + (1.0 - gamma) * *previous;
}

inline double clamp01(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

struct IntervalMetrics {
  std::size_t interval = 0;
  double a_i = 0.0;
  double raw_r2 = 0.0;
  double e_i = 0.0;
  double e_bar_i = 0.0;
  double s_i = 0.0;
  double ema_s_i = 0.0;
  double d_i = 0.0;
  // Accuracy could not be computed for this interval and was carried over.
  bool carried = false;
};

/// Largest per-interval inference energy seen while streaming the training
/// pairs through the most expensive family.
inline double calibrate_max_interval_energy(std::size_t training_pairs, std::size_t interval_len,
                                            const EnergyCostModel& costs) {
  if (training_pairs == 0 || interval_len == 0) throw TooShortError("calibration needs training data");
  double best = 0.0;
  for (std::size_t start = 0; start < training_pairs; start += interval_len) {
    const std::size_t n = std::min(interval_len, training_pairs - start);
    best = std::max(best, charge(costs, OpKind::Infer, Family::Recurrent, n));
  }
  return best;
}

struct MonitorInputs {
  std::span<const ObservationRecord> records;  // observations since the last interval
  std::span<const double> recent_truth;        // sample for the current distribution P_t
  const Histogram* reference = nullptr;        // P_r of the deployed model
  double e_max = 1.0;
  std::optional<double> prior_ema;
  const IntervalMetrics* previous = nullptr;
};

inline IntervalMetrics aggregate_interval(std::size_t interval, const MonitorInputs& in, const SustainabilityGoals& goals) {
  IntervalMetrics m;
  m.interval = interval;

  std::vector<double> y, yhat;
  y.reserve(in.records.size());
  yhat.reserve(in.records.size());
  for (const auto& r : in.records) {
    y.push_back(r.y_true);
    yhat.push_back(r.y_pred);
    m.e_i += r.energy;
  }

  bool have_r2 = false;
  if (in.records.size() >= 2) {
    try {
      m.raw_r2 = r_squared(y, yhat);
      have_r2 = true;
    } catch (const DegenerateError&) {
    }
  }
  if (have_r2) {
    m.a_i = clamp01(m.raw_r2);
  } else {
    m.carried = true;
    m.a_i = in.previous ? in.previous->a_i : 0.0;
    m.raw_r2 = in.previous ? in.previous->raw_r2 : std::numeric_limits<double>::quiet_NaN();
  }

  m.e_bar_i = m.e_i / in.e_max;
  m.s_i = performance_score(m.a_i, clamp01(m.e_bar_i), goals.beta);
  m.ema_s_i = update_ema(in.prior_ema, m.s_i, goals.gamma);

  if (in.reference && !in.recent_truth.empty()) {
    const Histogram current = estimate_histogram(in.recent_truth, in.reference->edges);
    m.d_i = kl_divergence(current, *in.reference);
  }
  return m;
}

// ---------------------------------------------------------------------------
// CSV rows

inline constexpr std::string_view kMetricsHeader =
    "interval,a_i,raw_r2,e_i,e_bar_i,s_i,ema_s_i,d_i,tau_e_i,active_model,cum_energy_eu";

struct MetricsRow {
  IntervalMetrics metrics;
  double tau_e = 0.0;
  std::string active_model;
  double cumulative_energy = 0.0;
};

inline std::string format_metrics_row(const MetricsRow& r) {
  const auto& m = r.metrics;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", m.interval, m.a_i, m.raw_r2, m.e_i, m.e_bar_i, m.s_i,
                     m.ema_s_i, m.d_i, r.tau_e, r.active_model, r.cumulative_energy);
}

inline void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) out << format_metrics_row(r) << '\n';
}

}  // namespace harmone
