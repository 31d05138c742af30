#pragma once

#include <algorithm>
#include <string_view>
#include <utility>
#include <vector>

#include "harmone/knowledge_base.hpp"
#include "harmone/monitor.hpp"

namespace harmone {

enum class UncertaintyKind { DriftDetected, EnergyViolation, PerformanceDegradation };

inline std::string_view to_string(UncertaintyKind k) noexcept {
  switch (k) {
    case UncertaintyKind::DriftDetected: return "DriftDetected";
    case UncertaintyKind::EnergyViolation: return "EnergyViolation";
    case UncertaintyKind::PerformanceDegradation: return "PerformanceDegradation";
  }
  return "?";
}

struct Uncertainty {
  UncertaintyKind kind;
  double magnitude = 0.0;  // how far past the boundary, in the metric's units
  std::size_t interval = 0;

  bool operator==(const Uncertainty&) const = default;
};

/// Dynamic energy threshold and its per-interval trace.
struct ThresholdState {
  double tau_e = 0.0;
  std::vector<std::pair<std::size_t, double>> history;

  static ThresholdState initial(const SustainabilityGoals& g) { return ThresholdState{g.tau_e_init, {}}; }
};

/// tau <- clamp(tau + delta * (e_ref - e_bar), tau_min, tau_max). Runs every
/// interval. `e_bar` is the unclamped normalized energy.
inline ThresholdState update_energy_threshold(ThresholdState state, std::size_t interval, double e_bar,
                                              const SustainabilityGoals& g) {
  const double raw = state.tau_e + g.delta * (g.e_ref - e_bar);
  state.tau_e = std::clamp(raw, g.tau_min(), g.tau_max());
  state.history.emplace_back(interval, state.tau_e);
  return state;
}

/// Boundary checks, all strict. Result is ordered Drift, Energy, Performance,
/// which is the priority the planner consumes.
inline std::vector<Uncertainty> detect(const IntervalMetrics& m, const SustainabilityGoals& g,
                                       const ThresholdState& threshold) {
  std::vector<Uncertainty> out;
  if (m.d_i > g.tau_drift) out.push_back({UncertaintyKind::DriftDetected, m.d_i - g.tau_drift, m.interval});
  if (m.e_bar_i > threshold.tau_e)
    out.push_back({UncertaintyKind::EnergyViolation, m.e_bar_i - threshold.tau_e, m.interval});
  if (m.ema_s_i < g.s_min)
    out.push_back({UncertaintyKind::PerformanceDegradation, g.s_min - m.ema_s_i, m.interval});
  return out;
}

}  // namespace harmone
