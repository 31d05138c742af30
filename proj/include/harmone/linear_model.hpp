#pragma once

#include <Eigen/Dense>

#include "harmone/model_types.hpp"

namespace harmone {

/// Least squares on standardized lag features with an unpenalized intercept.
/// `ridge` only guards against a singular normal matrix.
inline LinearParams fit_linear(const TrainingSet<kLag>& set, const Scaler& scaler,
                               double ridge = 1e-8) {
  constexpr Eigen::Index p = kLag + 1;
  Eigen::Matrix<double, p, p> gram = Eigen::Matrix<double, p, p>::Zero();
  Eigen::Matrix<double, p, 1> rhs = Eigen::Matrix<double, p, 1>::Zero();
  Eigen::Matrix<double, p, 1> row;
  for (std::size_t k = 0; k < set.size(); ++k) {
    row(0) = 1.0;
    for (std::size_t j = 0; j < kLag; ++j) row(static_cast<Eigen::Index>(j + 1)) = scaler.x(set.inputs[k][j]);
    gram.noalias() += row * row.transpose();
    rhs.noalias() += row * scaler.y(set.targets[k]);
  }
  for (Eigen::Index j = 1; j < p; ++j) gram(j, j) += ridge;

  const Eigen::LDLT<Eigen::Matrix<double, p, p>> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw NumericalError("linear normal equations are singular");
  const Eigen::Matrix<double, p, 1> w = ldlt.solve(rhs);
  if (!w.allFinite()) throw NumericalError("linear fit produced non-finite weights");

  LinearParams out;
  out.intercept = w(0);
  for (std::size_t j = 0; j < kLag; ++j) out.weights[j] = w(static_cast<Eigen::Index>(j + 1));
  return out;
}

inline double predict_linear(const LinearParams& params, const Scaler& scaler,
                             const LagWindow& window) {
  double z = params.intercept;
  for (std::size_t j = 0; j < kLag; ++j) z += params.weights[j] * scaler.x(window[j]);
  return scaler.y_inverse(z);
}

/// Coefficients in raw flow units: y = bias + sum coef_j * x_j.
struct RawLinear {
  double bias = 0.0;
  std::array<double, kLag> coef{};
};

inline RawLinear to_raw(const LinearParams& params, const Scaler& s) {
  RawLinear raw;
  double shift = 0.0;
  for (std::size_t j = 0; j < kLag; ++j) {
    raw.coef[j] = params.weights[j] * s.y_std / s.x_std;
    shift += raw.coef[j] * s.x_mean;
  }
  raw.bias = s.y_mean + s.y_std * params.intercept - shift;
  return raw;
}

/// Builds parameters (with an identity scaler) from raw-unit coefficients.
inline std::pair<LinearParams, Scaler> from_raw(const RawLinear& raw) {
  LinearParams p;
  p.intercept = raw.bias;
  p.weights = raw.coef;
  return {p, Scaler{}};
}

}  // namespace harmone
