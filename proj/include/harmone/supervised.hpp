#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "harmone/error.hpp"

namespace harmone {

/// Number of past readings fed to every forecaster.
inline constexpr std::size_t kLag = 5;

/// Consecutive readings, oldest first.
template <std::size_t Lag = kLag>
using Window = std::array<double, Lag>;

using LagWindow = Window<kLag>;

template <std::size_t Lag = kLag>
struct TrainingSet {
  std::vector<Window<Lag>> inputs;
  std::vector<double> targets;

  std::size_t size() const noexcept { return targets.size(); }
  bool empty() const noexcept { return targets.empty(); }
};

/// Slides a Lag-wide window over `series`; window k predicts series[k + Lag].
template <std::size_t Lag = kLag>
TrainingSet<Lag> make_supervised(std::span<const double> series) {
  static_assert(Lag >= 1);
  if (series.size() <= Lag) {
    throw TooShortError("series of length " + std::to_string(series.size()) +
                        " is too short for lag " + std::to_string(Lag));
  }
  TrainingSet<Lag> set;
  const std::size_t n = series.size() - Lag;
  set.inputs.resize(n);
  set.targets.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < Lag; ++j) set.inputs[k][j] = series[k + j];
    set.targets[k] = series[k + Lag];
  }
  return set;
}

/// Window ending just before `end` (exclusive).
template <std::size_t Lag = kLag>
Window<Lag> window_before(std::span<const double> series, std::size_t end) {
  if (end < Lag || end > series.size()) throw TooShortError("not enough history for a lag window");
  Window<Lag> w;
  for (std::size_t j = 0; j < Lag; ++j) w[j] = series[end - Lag + j];
  return w;
}

template <std::size_t Lag>
bool all_finite(const Window<Lag>& w) noexcept {
  for (double v : w)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace harmone
