#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "harmone/error.hpp"
#include "harmone/supervised.hpp"

namespace harmone {

/// Forecaster families ordered by inference cost.
enum class Family { Linear, Kernel, Recurrent };

inline constexpr std::array<Family, 3> kAllFamilies{Family::Linear, Family::Kernel,
                                                     Family::Recurrent};

inline std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::Linear: return "linear";
    case Family::Kernel: return "kernel";
    case Family::Recurrent: return "recurrent";
  }
  return "?";
}

inline std::optional<Family> family_from_string(std::string_view s) noexcept {
  for (Family f : kAllFamilies)
    if (to_string(f) == s) return f;
  return std::nullopt;
}

/// Standardization constants fitted on the training window.
struct Scaler {
  double x_mean = 0.0;
  double x_std = 1.0;
  double y_mean = 0.0;
  double y_std = 1.0;

  double x(double raw) const noexcept { return (raw - x_mean) / x_std; }
  double y(double raw) const noexcept { return (raw - y_mean) / y_std; }
  double y_inverse(double z) const noexcept { return y_mean + y_std * z; }

  bool operator==(const Scaler&) const = default;
};

struct LinearParams {
  double intercept = 0.0;
  std::array<double, kLag> weights{};

  bool operator==(const LinearParams&) const = default;
};

/// Random Fourier features: phi_j(z) = sqrt(2/D) cos(omega_j . z + phase_j).
struct KernelParams {
  std::vector<std::array<double, kLag>> omega;
  std::vector<double> phase;
  std::vector<double> weights;

  std::size_t features() const noexcept { return weights.size(); }
  bool operator==(const KernelParams&) const = default;
};

/// Single-layer Elman network; inputs are the standardized lag values fed
/// one per step.
struct RecurrentParams {
  std::size_t hidden = 0;
  std::vector<double> w_in;      // hidden
  std::vector<double> w_rec;     // hidden x hidden, row-major
  std::vector<double> b_hidden;  // hidden
  std::vector<double> w_out;     // hidden
  double b_out = 0.0;

  bool operator==(const RecurrentParams&) const = default;
};

using ModelParams = std::variant<LinearParams, KernelParams, RecurrentParams>;

/// Half-open range of series indices a model was fitted on.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const Segment&) const = default;
};

struct TrainedModel {
  std::string model_id;
  Family family = Family::Linear;
  std::uint64_t seed = 0;
  Segment trained_on;
  Scaler scaler;
  ModelParams params;

  bool operator==(const TrainedModel&) const = default;
};

}  // namespace harmone
