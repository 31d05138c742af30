#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include <json.hpp>

#include "harmone/kernel_model.hpp"
#include "harmone/linear_model.hpp"
#include "harmone/model_types.hpp"
#include "harmone/recurrent_model.hpp"

namespace harmone {

struct TrainOptions {
  double linear_ridge = 1e-8;
  KernelOptions kernel;
  RecurrentOptions recurrent;
};

/// Mean/std over all lag values (inputs) and over the targets. A zero spread
/// is replaced by 1 so constant series stay well defined.
inline Scaler fit_scaler(const TrainingSet<kLag>& set) {
  auto mean_std = [](auto&& each, std::size_t n) {
    double sum = 0.0, sq = 0.0;
    each([&](double v) { sum += v; });
    const double mean = sum / static_cast<double>(n);
    each([&](double v) { sq += (v - mean) * (v - mean); });
    double sd = std::sqrt(sq / static_cast<double>(n));
    if (!(sd > 1e-12)) sd = 1.0;
    return std::pair{mean, sd};
  };
  const auto [xm, xs] = mean_std(
      [&](auto f) {
        for (const auto& w : set.inputs)
          for (double v : w) f(v);
      },
      set.size() * kLag);
  const auto [ym, ys] = mean_std(
      [&](auto f) {
        for (double v : set.targets) f(v);
      },
      set.size());
  return Scaler{xm, xs, ym, ys};
}

inline TrainedModel train(Family family, const TrainingSet<kLag>& set, std::uint64_t seed,
                          const TrainOptions& opt = {}, std::string model_id = {},
                          Segment trained_on = {}) {
  if (set.empty()) throw EmptyTrainingSetError("cannot train on an empty training set");
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (!all_finite(set.inputs[k]) || !std::isfinite(set.targets[k]))
      throw NumericalError("training data contains non-finite values");
  }
  TrainedModel m;
  m.model_id = model_id.empty() ? std::string(to_string(family)) : std::move(model_id);
  m.family = family;
  m.seed = seed;
  m.trained_on = trained_on;
  m.scaler = fit_scaler(set);
  switch (family) {
    case Family::Linear: m.params = fit_linear(set, m.scaler, opt.linear_ridge); break;
    case Family::Kernel: m.params = fit_kernel(set, m.scaler, seed, opt.kernel); break;
    case Family::Recurrent: m.params = fit_recurrent(set, m.scaler, seed, opt.recurrent); break;
  }
  return m;
}

inline double predict(const TrainedModel& model, const LagWindow& window) {
  if (!all_finite(window)) throw NonFiniteError("lag window contains non-finite values");
  const double y = std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LinearParams>) return predict_linear(p, model.scaler, window);
        else if constexpr (std::is_same_v<P, KernelParams>) return predict_kernel(p, model.scaler, window);
        else return predict_recurrent(p, model.scaler, window);
      },
      model.params);
  if (!std::isfinite(y)) throw NonFiniteError("model '" + model.model_id + "' produced a non-finite prediction");
  return y;
}

// ---------------------------------------------------------------------------
// JSON document: {model_id, family, seed, trained_on, scaler, params}

inline nlohmann::ordered_json to_json(const TrainedModel& m) {
  nlohmann::ordered_json j;
  j["model_id"] = m.model_id;
  j["family"] = std::string(to_string(m.family));
  j["seed"] = m.seed;
  j["trained_on"] = {{"begin", m.trained_on.begin}, {"end", m.trained_on.end}};
  j["scaler"] = {{"x_mean", m.scaler.x_mean},
                 {"x_std", m.scaler.x_std},
                 {"y_mean", m.scaler.y_mean},
                 {"y_std", m.scaler.y_std}};
  nlohmann::ordered_json p;
  std::visit(
      [&](const auto& params) {
        using P = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<P, LinearParams>) {
          p["intercept"] = params.intercept;
          p["weights"] = params.weights;
        } else if constexpr (std::is_same_v<P, KernelParams>) {
          p["omega"] = params.omega;
          p["phase"] = params.phase;
          p["weights"] = params.weights;
        } else {
          p["hidden"] = params.hidden;
          p["w_in"] = params.w_in;
          p["w_rec"] = params.w_rec;
          p["b_hidden"] = params.b_hidden;
          p["w_out"] = params.w_out;
          p["b_out"] = params.b_out;
        }
      },
      m.params);
  j["params"] = std::move(p);
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    TrainedModel m;
    m.model_id = j.at("model_id").get<std::string>();
    const auto fam = family_from_string(j.at("family").get<std::string>());
    if (!fam) throw ParseError("unknown model family '" + j.at("family").get<std::string>() + "'");
    m.family = *fam;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.trained_on = {j.at("trained_on").at("begin").get<std::size_t>(),
                    j.at("trained_on").at("end").get<std::size_t>()};
    const auto& s = j.at("scaler");
    m.scaler = {s.at("x_mean").get<double>(), s.at("x_std").get<double>(), s.at("y_mean").get<double>(),
                s.at("y_std").get<double>()};
    const auto& p = j.at("params");
    switch (m.family) {
      case Family::Linear:
        m.params = LinearParams{p.at("intercept").get<double>(),
                                p.at("weights").get<std::array<double, kLag>>()};
        break;
      case Family::Kernel:
        m.params = KernelParams{p.at("omega").get<std::vector<std::array<double, kLag>>>(),
                                p.at("phase").get<std::vector<double>>(),
                                p.at("weights").get<std::vector<double>>()};
        break;
      case Family::Recurrent:
        m.params = RecurrentParams{p.at("hidden").get<std::size_t>(), p.at("w_in").get<std::vector<double>>(),
                                   p.at("w_rec").get<std::vector<double>>(),
                                   p.at("b_hidden").get<std::vector<double>>(),
                                   p.at("w_out").get<std::vector<double>>(), p.at("b_out").get<double>()};
        break;
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
}

inline std::string serialize(const TrainedModel& m) { return to_json(m).dump(); }

}  // namespace harmone
