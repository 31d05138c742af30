#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include "harmone/error.hpp"
#include "harmone/model_types.hpp"

namespace harmone {

enum class OpKind { Infer, Train, Loop };

/// Deterministic energy model in energy units (eu).
struct EnergyCostModel {
  std::array<double, 3> infer_cost{1.0, 3.0, 12.0};
  std::array<double, 3> train_cost{200.0, 800.0, 6000.0};
  double loop_cost = 0.5;

  double infer(Family f) const noexcept { return infer_cost[static_cast<std::size_t>(f)]; }
  double train(Family f) const noexcept { return train_cost[static_cast<std::size_t>(f)]; }
  double most_expensive_infer() const noexcept { return infer_cost[2]; }

  bool operator==(const EnergyCostModel&) const = default;
};

/// Rejects tables that break LINEAR < KERNEL < RECURRENT or contain
/// non-positive costs.
inline void validate(const EnergyCostModel& c) {
  auto ordered = [](const std::array<double, 3>& a) { return a[0] < a[1] && a[1] < a[2]; };
  for (double v : c.infer_cost)
    if (!(v > 0.0)) throw ValidationError("energy_costs.infer", "costs must be positive");
  for (double v : c.train_cost)
    if (!(v > 0.0)) throw ValidationError("energy_costs.train", "costs must be positive");
  if (!(c.loop_cost > 0.0)) throw ValidationError("energy_costs.loop", "cost must be positive");
  if (!ordered(c.infer_cost)) throw ValidationError("energy_costs.infer", "must increase linear < kernel < recurrent");
  if (!ordered(c.train_cost)) throw ValidationError("energy_costs.train", "must increase linear < kernel < recurrent");
}

inline double charge(const EnergyCostModel& c, OpKind kind, Family family, std::size_t count) {
  const double n = static_cast<double>(count);
  switch (kind) {
    case OpKind::Infer: return n * c.infer(family);
    case OpKind::Train: return n * c.train(family);
    case OpKind::Loop: return n * c.loop_cost;
  }
  return 0.0;
}

inline double charge_loop(const EnergyCostModel& c, std::size_t count) {
  return static_cast<double>(count) * c.loop_cost;
}

/// Running totals per charge kind; `total()` is the sum of every charge.
class EnergyMeter {
 public:
  double add(OpKind kind, double eu) {
    by_kind_[static_cast<std::size_t>(kind)] += eu;
    total_ += eu;
    ++charges_;
    return eu;
  }

  double total() const noexcept { return total_; }
  double of(OpKind kind) const noexcept { return by_kind_[static_cast<std::size_t>(kind)]; }
  std::size_t charges() const noexcept { return charges_; }

 private:
  std::array<double, 3> by_kind_{};
  double total_ = 0.0;
  std::size_t charges_ = 0;
};

}  // namespace harmone
