#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "harmone/analyzer.hpp"
#include "harmone/knowledge_base.hpp"
#include "harmone/rng.hpp"

namespace harmone {

enum class ActionKind { SwitchTo, ReuseVersion, RetrainCurrent, NoOp };

inline std::string_view to_string(ActionKind k) noexcept {
  switch (k) {
    case ActionKind::SwitchTo: return "SwitchTo";
    case ActionKind::ReuseVersion: return "ReuseVersion";
    case ActionKind::RetrainCurrent: return "RetrainCurrent";
    case ActionKind::NoOp: return "NoOp";
  }
  return "?";
}

struct AdaptationAction {
  ActionKind kind = ActionKind::NoOp;
  std::string target;  // model slot for SwitchTo, version id for ReuseVersion
  Trigger trigger = Trigger::None;
  std::size_t decided_at = 0;
  std::string detail;

  bool operator==(const AdaptationAction&) const = default;
};

inline AdaptationAction no_op(std::size_t interval) { return {ActionKind::NoOp, {}, Trigger::None, interval, {}}; }

struct BoardEntry {
  std::string id;
  double ema = 0.0;
  double infer_cost = 0.0;
};

/// Per-model smoothed scores. Only the active model's EMA moves; the others
/// keep their last value.
struct ModelScoreBoard {
  std::vector<BoardEntry> entries;
  std::string active;
  std::optional<std::size_t> last_adaptation;

  BoardEntry& at(const std::string& id) {
    for (auto& e : entries)
      if (e.id == id) return e;
    throw UnknownModelError("no score for model '" + id + "'");
  }
  const BoardEntry& at(const std::string& id) const { return const_cast<ModelScoreBoard*>(this)->at(id); }
};

/// Highest EMA among the non-active models; ties go to the cheaper model,
/// then to the lexicographically smaller id.
inline std::string select_exploit(const ModelScoreBoard& board) {
  const BoardEntry* best = nullptr;
  for (const auto& e : board.entries) {
    if (e.id == board.active) continue;
    if (!best || std::tuple(-e.ema, e.infer_cost, e.id) < std::tuple(-best->ema, best->infer_cost, best->id)) best = &e;
  }
  if (!best) throw NoAlternativeError("no model other than '" + board.active + "' to switch to");
  return best->id;
}

/// With probability epsilon a uniformly random model (active included),
/// otherwise the exploit choice.
inline std::string epsilon_greedy(const ModelScoreBoard& board, double epsilon, Rng& rng) {
  if (rng.uniform() < epsilon) return board.entries[rng.index(board.entries.size())].id;
  return select_exploit(board);
}

inline AdaptationAction plan_drift(const Histogram& current, const VersionedModelRepository& vmr,
                                   const SustainabilityGoals& goals, std::size_t interval) {
  if (auto id = match_distribution(vmr, current, goals.tau_match)) {
    const double d = kl_divergence(current, vmr.at(*id).train_histogram);
    return {ActionKind::ReuseVersion, *id, Trigger::Drift, interval, fmt::format("match kl={:.4f}", d)};
  }
  return {ActionKind::RetrainCurrent, {}, Trigger::Drift, interval, "no stored version matches"};
}

struct PlannerPolicy {
  // When false, drift is handled by switching models (no reuse, no retrain).
  bool drift_tactics = true;
};

inline bool in_cooldown(const ModelScoreBoard& board, std::size_t interval, std::size_t cooldown) {
  return board.last_adaptation && interval - *board.last_adaptation <= cooldown;
}

inline AdaptationAction plan(std::vector<Uncertainty> uncertainties, const ModelScoreBoard& board,
                             const Histogram& current, const VersionedModelRepository& vmr,
                             const SustainabilityGoals& goals, Rng& rng, std::size_t interval,
                             const PlannerPolicy& policy = {}) {
  if (uncertainties.empty() || in_cooldown(board, interval, goals.cooldown)) return no_op(interval);
  std::stable_sort(uncertainties.begin(), uncertainties.end(),
                   [](const auto& a, const auto& b) { return a.kind < b.kind; });
  const Uncertainty& top = uncertainties.front();

  auto switch_to = [&](std::string target, Trigger trig, std::string detail) {
    if (target == board.active) return no_op(interval);
    return AdaptationAction{ActionKind::SwitchTo, std::move(target), trig, interval, std::move(detail)};
  };

  try {
    switch (top.kind) {
      case UncertaintyKind::DriftDetected:
        if (policy.drift_tactics) return plan_drift(current, vmr, goals, interval);
        return switch_to(epsilon_greedy(board, goals.epsilon, rng), Trigger::Drift,
                         fmt::format("drift {:.4f} over limit", top.magnitude));
      case UncertaintyKind::EnergyViolation:
        return switch_to(select_exploit(board), Trigger::Energy,
                         fmt::format("energy {:.4f} over threshold", top.magnitude));
      case UncertaintyKind::PerformanceDegradation:
        return switch_to(epsilon_greedy(board, goals.epsilon, rng), Trigger::Performance,
                         fmt::format("score {:.4f} under minimum", top.magnitude));
    }
  } catch (const NoAlternativeError&) {
    return no_op(interval);
  }
  return no_op(interval);
}

}  // namespace harmone
