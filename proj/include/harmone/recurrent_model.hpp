#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "harmone/model_types.hpp"
#include "harmone/rng.hpp"

namespace harmone {

struct RecurrentOptions {
  std::size_t hidden = 16;
  std::size_t epochs = 30;
  double learning_rate = 0.01;
  // Mini-batches are taken in series order; there is no shuffling.
  std::size_t batch = 32;
};

namespace detail {

// Forward pass keeping every hidden state; states[0] is the zero state.
inline double rnn_forward(const RecurrentParams& p, const LagWindow& z,
                          std::vector<std::vector<double>>& states) {
  const std::size_t H = p.hidden;
  states.assign(kLag + 1, std::vector<double>(H, 0.0));
  for (std::size_t t = 0; t < kLag; ++t) {
    const auto& prev = states[t];
    auto& cur = states[t + 1];
    for (std::size_t i = 0; i < H; ++i) {
      double a = p.w_in[i] * z[t] + p.b_hidden[i];
      const double* row = &p.w_rec[i * H];
      for (std::size_t j = 0; j < H; ++j) a += row[j] * prev[j];
      cur[i] = std::tanh(a);
    }
  }
  double y = p.b_out;
  for (std::size_t i = 0; i < H; ++i) y += p.w_out[i] * states[kLag][i];
  return y;
}

struct AdamSlot {
  std::vector<double> m, v;
  explicit AdamSlot(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

inline void adam_step(std::vector<double>& w, const std::vector<double>& g, AdamSlot& s, double lr,
                      std::size_t step) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t k = 0; k < w.size(); ++k) {
    s.m[k] = b1 * s.m[k] + (1.0 - b1) * g[k];
    s.v[k] = b2 * s.v[k] + (1.0 - b2) * g[k] * g[k];
    w[k] -= lr * (s.m[k] / c1) / (std::sqrt(s.v[k] / c2) + eps);
  }
}

}  // namespace detail

inline RecurrentParams init_recurrent(std::size_t hidden, std::uint64_t seed) {
  Rng rng(seed);
  const double a = 1.0 / std::sqrt(static_cast<double>(hidden));
  auto draw = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-a, a);
    return v;
  };
  RecurrentParams p;
  p.hidden = hidden;
  p.w_in = draw(hidden);
  p.w_rec = draw(hidden * hidden);
  p.b_hidden = draw(hidden);
  p.w_out = draw(hidden);
  p.b_out = rng.uniform(-a, a);
  return p;
}

/// Trains with backpropagation through the lag window and Adam updates.
/// The seed only affects initialization.
inline RecurrentParams fit_recurrent(const TrainingSet<kLag>& set, const Scaler& scaler,
                                     std::uint64_t seed, const RecurrentOptions& opt = {}) {
  const std::size_t H = opt.hidden;
  RecurrentParams p = init_recurrent(H, seed);

  std::vector<LagWindow> z(set.size());
  std::vector<double> target(set.size());
  for (std::size_t k = 0; k < set.size(); ++k) {
    for (std::size_t d = 0; d < kLag; ++d) z[k][d] = scaler.x(set.inputs[k][d]);
    target[k] = scaler.y(set.targets[k]);
  }

  std::vector<double> g_in(H), g_rec(H * H), g_b(H), g_out(H), g_bout(1);
  detail::AdamSlot s_in(H), s_rec(H * H), s_b(H), s_out(H), s_bout(1);
  std::vector<double> b_out{p.b_out};
  std::vector<std::vector<double>> states;
  std::vector<double> dh(H), da(H);
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < set.size(); start += opt.batch) {
      const std::size_t stop = std::min(set.size(), start + opt.batch);
      const double scale = 1.0 / static_cast<double>(stop - start);
      std::fill(g_in.begin(), g_in.end(), 0.0);
      std::fill(g_rec.begin(), g_rec.end(), 0.0);
      std::fill(g_b.begin(), g_b.end(), 0.0);
      std::fill(g_out.begin(), g_out.end(), 0.0);
      g_bout[0] = 0.0;
      p.b_out = b_out[0];

      for (std::size_t k = start; k < stop; ++k) {
        const double y = detail::rnn_forward(p, z[k], states);
        const double err = y - target[k];
        epoch_loss += 0.5 * err * err;
        const double dy = err * scale;
        g_bout[0] += dy;
        for (std::size_t i = 0; i < H; ++i) {
          g_out[i] += dy * states[kLag][i];
          dh[i] = dy * p.w_out[i];
        }
        for (std::size_t t = kLag; t-- > 0;) {
          const auto& h = states[t + 1];
          const auto& prev = states[t];
          for (std::size_t i = 0; i < H; ++i) {
            da[i] = dh[i] * (1.0 - h[i] * h[i]);
            g_in[i] += da[i] * z[k][t];
            g_b[i] += da[i];
            double* grow = &g_rec[i * H];
            for (std::size_t j = 0; j < H; ++j) grow[j] += da[i] * prev[j];
          }
          for (std::size_t j = 0; j < H; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < H; ++i) acc += p.w_rec[i * H + j] * da[i];
            dh[j] = acc;
          }
        }
      }

      ++step;
      detail::adam_step(p.w_in, g_in, s_in, opt.learning_rate, step);
      detail::adam_step(p.w_rec, g_rec, s_rec, opt.learning_rate, step);
      detail::adam_step(p.b_hidden, g_b, s_b, opt.learning_rate, step);
      detail::adam_step(p.w_out, g_out, s_out, opt.learning_rate, step);
      detail::adam_step(b_out, g_bout, s_bout, opt.learning_rate, step);
    }
    if (!std::isfinite(epoch_loss)) throw NumericalError("recurrent training loss is not finite");
  }
  p.b_out = b_out[0];
  return p;
}

inline double predict_recurrent(const RecurrentParams& params, const Scaler& scaler,
                                const LagWindow& window) {
  LagWindow z;
  for (std::size_t d = 0; d < kLag; ++d) z[d] = scaler.x(window[d]);
  std::vector<std::vector<double>> states;
  return scaler.y_inverse(detail::rnn_forward(params, z, states));
}

}  // namespace harmone
