#pragma once

#include <span>
#include <string>

#include "harmone/energy.hpp"
#include "harmone/forecasting.hpp"
#include "harmone/histogram.hpp"
#include "harmone/knowledge_base.hpp"
#include "harmone/planner.hpp"
#include "harmone/rng.hpp"

namespace harmone {

/// Retraining always uses the trailing window of this many readings.
inline constexpr std::size_t kRetrainWindow = 1200;

struct DeploymentState {
  TrainedModel active_model;
  Histogram active_reference;  // training distribution of active_model
  std::string slot;            // family slot in the current model repository
  std::size_t deployed_at = 0;
};

struct ExecutionContext {
  ModelRepository& repository;
  VersionedModelRepository& vmr;
  std::span<const double> history;  // every reading observed so far, oldest first
  std::span<const double> edges;    // shared histogram edges
  const EnergyCostModel& costs;
  const SustainabilityGoals& goals;
  const TrainOptions& train_options;
  std::size_t timestep = 0;  // series index of the first reading not yet seen
};

struct ExecutionResult {
  DeploymentState deployment;
  AdaptationEvent event;
  double energy = 0.0;  // training energy charged by this action
};

inline ExecutionResult execute(const AdaptationAction& action, const DeploymentState& current, ExecutionContext& ctx) {
  ExecutionResult out;
  out.event.interval = action.decided_at;
  out.event.trigger = action.trigger;
  out.event.from_model = current.active_model.model_id;
  out.event.detail = action.detail;

  switch (action.kind) {
    case ActionKind::SwitchTo: {
      const RepositoryModel& entry = ctx.repository.at(action.target);
      out.deployment = {entry.model, entry.train_histogram, action.target, action.decided_at};
      out.event.kind = EventKind::Switch;
      break;
    }
    case ActionKind::ReuseVersion: {
      const VersionedModelEntry& entry = ctx.vmr.at(action.target);
      const std::string slot{to_string(entry.model.family)};
      ctx.repository.put(slot, {entry.model, entry.train_histogram});
      out.deployment = {entry.model, entry.train_histogram, slot, action.decided_at};
      out.event.kind = EventKind::VersionReuse;
      break;
    }
    case ActionKind::RetrainCurrent: {
      const std::size_t need = kRetrainWindow + kLag;
      if (ctx.history.size() < need) {
        throw InsufficientDataError("retraining needs " + std::to_string(need) + " readings, have " +
                                    std::to_string(ctx.history.size()));
      }
      const auto window = ctx.history.last(need);
      const auto set = make_supervised<kLag>(window);
      const Family family = current.active_model.family;
      const Segment seg{ctx.timestep - kRetrainWindow, ctx.timestep};
      TrainedModel model = train(family, set, derive_seed(ctx.goals.seed, 1'000'000 + action.decided_at),
                                 ctx.train_options, {}, seg);
      Histogram hist = estimate_histogram(ctx.history.last(kRetrainWindow), ctx.edges);
      const std::string id = ctx.vmr.store_version(std::move(model), std::move(hist), ctx.timestep);
      const VersionedModelEntry& stored = ctx.vmr.at(id);
      const std::string slot{to_string(family)};
      ctx.repository.put(slot, {stored.model, stored.train_histogram});
      out.deployment = {stored.model, stored.train_histogram, slot, action.decided_at};
      out.event.kind = EventKind::Retrain;
      out.energy = charge(ctx.costs, OpKind::Train, family, 1);
      break;
    }
    case ActionKind::NoOp:
      throw std::invalid_argument("execute called with NoOp");
  }
  out.event.to_model = out.deployment.active_model.model_id;
  return out;
}

}  // namespace harmone
