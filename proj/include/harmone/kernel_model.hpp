#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "harmone/model_types.hpp"
#include "harmone/rng.hpp"

namespace harmone {

struct KernelOptions {
  std::size_t features = 64;
  double ridge = 1e-2;
  // RBF length scale in standardized units.
  double length_scale = 2.0;
};

inline double rff_feature(const KernelParams& params, std::size_t j, const LagWindow& z) {
  double arg = params.phase[j];
  for (std::size_t d = 0; d < kLag; ++d) arg += params.omega[j][d] * z[d];
  return std::sqrt(2.0 / static_cast<double>(params.features())) * std::cos(arg);
}

inline LagWindow standardize(const Scaler& scaler, const LagWindow& window) {
  LagWindow z;
  for (std::size_t d = 0; d < kLag; ++d) z[d] = scaler.x(window[d]);
  return z;
}

/// Ridge regression over random Fourier features approximating an RBF kernel.
/// Frequencies and phases come from `seed`; the fit itself is closed form.
inline KernelParams fit_kernel(const TrainingSet<kLag>& set, const Scaler& scaler,
                               std::uint64_t seed, const KernelOptions& opt = {}) {
  const std::size_t D = opt.features;
  KernelParams params;
  params.omega.resize(D);
  params.phase.resize(D);
  params.weights.assign(D, 0.0);

  Rng rng(seed);
  for (std::size_t j = 0; j < D; ++j) {
    for (std::size_t d = 0; d < kLag; ++d) params.omega[j][d] = rng.normal() / opt.length_scale;
    params.phase[j] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }

  const auto n = static_cast<Eigen::Index>(set.size());
  const auto dim = static_cast<Eigen::Index>(D);
  Eigen::MatrixXd phi(n, dim);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const LagWindow z = standardize(scaler, set.inputs[static_cast<std::size_t>(k)]);
    for (Eigen::Index j = 0; j < dim; ++j) phi(k, j) = rff_feature(params, static_cast<std::size_t>(j), z);
    y(k) = scaler.y(set.targets[static_cast<std::size_t>(k)]);
  }
  Eigen::MatrixXd gram = phi.transpose() * phi;
  gram.diagonal().array() += opt.ridge;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw NumericalError("kernel ridge system is singular");
  const Eigen::VectorXd w = ldlt.solve(phi.transpose() * y);
  if (!w.allFinite()) throw NumericalError("kernel fit produced non-finite weights");
  for (std::size_t j = 0; j < D; ++j) params.weights[j] = w(static_cast<Eigen::Index>(j));
  return params;
}

inline double predict_kernel(const KernelParams& params, const Scaler& scaler,
                             const LagWindow& window) {
  const LagWindow z = standardize(scaler, window);
  double acc = 0.0;
  for (std::size_t j = 0; j < params.features(); ++j) acc += params.weights[j] * rff_feature(params, j, z);
  return scaler.y_inverse(acc);
}

}  // namespace harmone
