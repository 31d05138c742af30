#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "harmone/energy.hpp"
#include "harmone/error.hpp"
#include "harmone/histogram.hpp"
#include "harmone/model_types.hpp"

namespace harmone {

// ---------------------------------------------------------------------------
// Sustainability goals (decision map)

/// Design-time constants that bound every runtime decision.
struct SustainabilityGoals {
  double beta = 0.5;           // accuracy weight in the performance score
  double gamma = 0.3;          // EMA smoothing
  double delta = 0.1;          // threshold controller gain
  double s_min = 0.6;          // minimum acceptable smoothed score
  double e_ref = 0.6;          // reference normalized energy
  double tau_e_init = 0.75;    // initial energy threshold
  std::pair<double, double> tau_e_bounds{0.3, 0.95};
  double tau_drift = 0.15;     // nats
  double tau_match = 0.05;     // nats
  double epsilon = 0.1;        // exploration probability
  std::size_t interval_len = 100;
  std::size_t cooldown = 1;
  std::size_t vmr_capacity = 16;
  std::size_t histogram_bins = 20;
  std::uint64_t seed = 42;

  double tau_min() const noexcept { return tau_e_bounds.first; }
  double tau_max() const noexcept { return tau_e_bounds.second; }

  bool operator==(const SustainabilityGoals&) const = default;
};

/// Checks fields in declaration order and reports the first violation.
inline void validate(const SustainabilityGoals& g) {
  auto in = [](double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; };
  if (!in(g.beta, 0.0, 1.0)) throw ValidationError("beta", "must lie in [0, 1]");
  if (!(std::isfinite(g.gamma) && g.gamma > 0.0 && g.gamma <= 1.0)) throw ValidationError("gamma", "must lie in (0, 1]");
  if (!(std::isfinite(g.delta) && g.delta > 0.0 && g.delta < 1.0)) throw ValidationError("delta", "must lie in (0, 1)");
  if (!in(g.s_min, 0.0, 1.0)) throw ValidationError("s_min", "must lie in [0, 1]");
  if (!(std::isfinite(g.e_ref) && g.e_ref > 0.0 && g.e_ref <= 1.0)) throw ValidationError("e_ref", "must lie in (0, 1]");
  const auto [lo, hi] = g.tau_e_bounds;
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo >= 0.0 && lo <= hi))
    throw ValidationError("tau_e_bounds", "need 0 <= tau_min <= tau_max");
  if (!in(g.tau_e_init, lo, hi)) throw ValidationError("tau_e_init", "must lie within tau_e_bounds");
  if (!(std::isfinite(g.tau_drift) && g.tau_drift >= 0.0)) throw ValidationError("tau_drift", "must be >= 0");
  if (!(std::isfinite(g.tau_match) && g.tau_match >= 0.0)) throw ValidationError("tau_match", "must be >= 0");
  if (!in(g.epsilon, 0.0, 1.0)) throw ValidationError("epsilon", "must lie in [0, 1]");
  if (g.interval_len < 1) throw ValidationError("interval_len", "must be >= 1");
  if (g.vmr_capacity < 1) throw ValidationError("vmr_capacity", "must be >= 1");
  if (g.histogram_bins < 2) throw ValidationError("histogram_bins", "must be >= 2");
}

/// Goals plus the energy cost table; both live in the same JSON document.
struct DecisionMap {
  SustainabilityGoals goals;
  EnergyCostModel costs;
};

namespace detail {

template <typename T>
void read_field(const nlohmann::json& j, const char* name, T& out) {
  if (!j.contains(name)) return;
  const auto& v = j.at(name);
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw ValidationError(name, "expected a number");
    out = v.get<double>();
  } else if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
    if (!v.is_number_integer()) throw ValidationError(name, "expected an integer");
    if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
      throw ValidationError(name, "must be >= 0");
    out = v.get<T>();
  }
}

inline std::array<double, 3> read_family_costs(const nlohmann::json& j, const char* name,
                                               std::array<double, 3> fallback) {
  if (!j.contains(name)) return fallback;
  const auto& v = j.at(name);
  const std::string field = std::string("energy_costs.") + name;
  if (!v.is_object()) throw ValidationError(field, "expected an object keyed by family");
  for (auto it = v.begin(); it != v.end(); ++it) {
    const auto fam = family_from_string(it.key());
    if (!fam) throw ValidationError(field + "." + it.key(), "unknown family");
    if (!it.value().is_number()) throw ValidationError(field + "." + it.key(), "expected a number");
    fallback[static_cast<std::size_t>(*fam)] = it.value().get<double>();
  }
  return fallback;
}

}  // namespace detail

inline DecisionMap parse_decision_map(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("decision map is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("decision map must be a JSON object");

  static constexpr std::string_view kKnown[] = {
      "beta",      "gamma",   "delta",    "s_min",        "e_ref",        "tau_e_init",   "tau_e_bounds",
      "tau_drift", "tau_match", "epsilon", "interval_len", "cooldown",    "vmr_capacity", "histogram_bins",
      "seed",      "energy_costs"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(std::begin(kKnown), std::end(kKnown), it.key()) == std::end(kKnown))
      throw ValidationError(it.key(), "unknown field");
  }

  DecisionMap dm;
  auto& g = dm.goals;
  detail::read_field(j, "beta", g.beta);
  detail::read_field(j, "gamma", g.gamma);
  detail::read_field(j, "delta", g.delta);
  detail::read_field(j, "s_min", g.s_min);
  detail::read_field(j, "e_ref", g.e_ref);
  detail::read_field(j, "tau_e_init", g.tau_e_init);
  if (j.contains("tau_e_bounds")) {
    const auto& b = j.at("tau_e_bounds");
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
      throw ValidationError("tau_e_bounds", "expected [tau_min, tau_max]");
    g.tau_e_bounds = {b[0].get<double>(), b[1].get<double>()};
  }
  detail::read_field(j, "tau_drift", g.tau_drift);
  detail::read_field(j, "tau_match", g.tau_match);
  detail::read_field(j, "epsilon", g.epsilon);
  detail::read_field(j, "interval_len", g.interval_len);
  detail::read_field(j, "cooldown", g.cooldown);
  detail::read_field(j, "vmr_capacity", g.vmr_capacity);
  detail::read_field(j, "histogram_bins", g.histogram_bins);
  detail::read_field(j, "seed", g.seed);
  validate(g);

  if (j.contains("energy_costs")) {
    const auto& c = j.at("energy_costs");
    if (!c.is_object()) throw ValidationError("energy_costs", "expected an object");
    for (auto it = c.begin(); it != c.end(); ++it) {
      if (it.key() != "infer" && it.key() != "train" && it.key() != "loop")
        throw ValidationError("energy_costs." + it.key(), "unknown field");
    }
    dm.costs.infer_cost = detail::read_family_costs(c, "infer", dm.costs.infer_cost);
    dm.costs.train_cost = detail::read_family_costs(c, "train", dm.costs.train_cost);
    if (c.contains("loop")) {
      if (!c.at("loop").is_number()) throw ValidationError("energy_costs.loop", "expected a number");
      dm.costs.loop_cost = c.at("loop").get<double>();
    }
  }
  validate(dm.costs);
  return dm;
}

inline DecisionMap read_decision_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open decision map '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_decision_map(buf.str());
}

inline SustainabilityGoals load_decision_map(const std::string& path) { return read_decision_map(path).goals; }

inline nlohmann::ordered_json to_json(const SustainabilityGoals& g) {
  nlohmann::ordered_json j;
  j["beta"] = g.beta;
  j["gamma"] = g.gamma;
  j["delta"] = g.delta;
  j["s_min"] = g.s_min;
  j["e_ref"] = g.e_ref;
  j["tau_e_init"] = g.tau_e_init;
  j["tau_e_bounds"] = {g.tau_e_bounds.first, g.tau_e_bounds.second};
  j["tau_drift"] = g.tau_drift;
  j["tau_match"] = g.tau_match;
  j["epsilon"] = g.epsilon;
  j["interval_len"] = g.interval_len;
  j["cooldown"] = g.cooldown;
  j["vmr_capacity"] = g.vmr_capacity;
  j["histogram_bins"] = g.histogram_bins;
  j["seed"] = g.seed;
  return j;
}

// ---------------------------------------------------------------------------
// Data repository

struct ObservationRecord {
  std::size_t timestep = 0;
  double y_true = 0.0;
  double y_pred = 0.0;
  std::string model_id;
  double energy = 0.0;
};

/// Append-only log of observations and predictions.
class DataRepository {
 public:
  void record_observation(std::size_t timestep, double y_true, double y_pred, std::string model_id, double energy) {
    if (!records_.empty() && timestep <= records_.back().timestep) {
      throw OrderError("timestep " + std::to_string(timestep) + " does not follow " +
                       std::to_string(records_.back().timestep));
    }
    records_.push_back({timestep, y_true, y_pred, std::move(model_id), energy});
  }

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::vector<ObservationRecord>& records() const noexcept { return records_; }
  std::span<const ObservationRecord> slice(std::size_t begin, std::size_t end) const {
    return std::span<const ObservationRecord>(records_).subspan(begin, end - begin);
  }
  void reserve(std::size_t n) { records_.reserve(n); }

 private:
  std::vector<ObservationRecord> records_;
};

// ---------------------------------------------------------------------------
// Current model repository: one deployable model per family slot.

struct RepositoryModel {
  TrainedModel model;
  Histogram train_histogram;
};

class ModelRepository {
 public:
  void put(std::string slot, RepositoryModel entry) { slots_.insert_or_assign(std::move(slot), std::move(entry)); }

  const RepositoryModel& at(const std::string& slot) const {
    const auto it = slots_.find(slot);
    if (it == slots_.end()) throw UnknownModelError("no model named '" + slot + "' in the current repository");
    return it->second;
  }
  bool contains(const std::string& slot) const { return slots_.count(slot) != 0; }
  std::size_t size() const noexcept { return slots_.size(); }
  const std::map<std::string, RepositoryModel>& slots() const noexcept { return slots_; }

 private:
  std::map<std::string, RepositoryModel> slots_;
};

// ---------------------------------------------------------------------------
// Versioned model repository

struct VersionedModelEntry {
  std::string version_id;
  TrainedModel model;
  Histogram train_histogram;
  std::size_t created_at = 0;
};

inline bool is_normalized(const Histogram& h, double tol = 1e-9) {
  double sum = 0.0;
  for (double p : h.probs) {
    if (!(p >= 0.0)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tol;
}

/// Retrained models paired with the distribution they were trained on.
/// Bounded; the oldest version is evicted first.
class VersionedModelRepository {
 public:
  explicit VersionedModelRepository(std::size_t capacity = 16) : capacity_(capacity) {
    if (capacity_ < 1) throw ValidationError("vmr_capacity", "must be >= 1");
  }

  /// Stores a copy of `model` renamed to the fresh version id.
  std::string store_version(TrainedModel model, Histogram train_histogram, std::size_t timestep) {
    if (!is_normalized(train_histogram)) throw ValidationError("train_histogram", "probabilities must sum to 1");
    std::string id = "v" + std::to_string(++last_id_);
    model.model_id = id;
    entries_.push_back({id, std::move(model), std::move(train_histogram), timestep});
    while (entries_.size() > capacity_) entries_.pop_front();
    return id;
  }

  const VersionedModelEntry* find(std::string_view id) const noexcept {
    for (const auto& e : entries_)
      if (e.version_id == id) return &e;
    return nullptr;
  }

  const VersionedModelEntry& at(std::string_view id) const {
    if (const auto* e = find(id)) return *e;
    throw UnknownVersionError("version '" + std::string(id) + "' is not in the repository");
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t capacity() const noexcept { return capacity_; }
  const std::deque<VersionedModelEntry>& entries() const noexcept { return entries_; }

 private:
  std::size_t capacity_;
  std::uint64_t last_id_ = 0;
  std::deque<VersionedModelEntry> entries_;
};

/// Stored version closest to `current` by KL(current || stored), if that
/// distance is below `tau_match`. Ties go to the newest version.
inline std::optional<std::string> match_distribution(const VersionedModelRepository& vmr, const Histogram& current,
                                                     double tau_match) {
  const VersionedModelEntry* best = nullptr;
  double best_kl = 0.0;
  for (const auto& e : vmr.entries()) {
    const double d = kl_divergence(current, e.train_histogram);
    if (!best || d < best_kl || (d == best_kl && e.created_at >= best->created_at)) {
      best = &e;
      best_kl = d;
    }
  }
  if (best && best_kl < tau_match) return best->version_id;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Adaptation events

enum class EventKind { Switch, Retrain, VersionReuse, ThresholdUpdate, NoAction };
enum class Trigger { Performance, Energy, Drift, Periodic, None };

inline std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::Switch: return "Switch";
    case EventKind::Retrain: return "Retrain";
    case EventKind::VersionReuse: return "VersionReuse";
    case EventKind::ThresholdUpdate: return "ThresholdUpdate";
    case EventKind::NoAction: return "NoAction";
  }
  return "?";
}

inline std::string_view to_string(Trigger t) noexcept {
  switch (t) {
    case Trigger::Performance: return "Performance";
    case Trigger::Energy: return "Energy";
    case Trigger::Drift: return "Drift";
    case Trigger::Periodic: return "Periodic";
    case Trigger::None: return "None";
  }
  return "?";
}

inline std::optional<EventKind> event_kind_from_string(std::string_view s) noexcept {
  for (auto k : {EventKind::Switch, EventKind::Retrain, EventKind::VersionReuse, EventKind::ThresholdUpdate,
                 EventKind::NoAction})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

inline std::optional<Trigger> trigger_from_string(std::string_view s) noexcept {
  for (auto t : {Trigger::Performance, Trigger::Energy, Trigger::Drift, Trigger::Periodic, Trigger::None})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

struct AdaptationEvent {
  std::size_t interval = 0;
  EventKind kind = EventKind::NoAction;
  Trigger trigger = Trigger::None;
  std::string from_model;
  std::string to_model;
  std::string detail;
  double loop_energy = 0.0;

  bool is_adaptation() const noexcept {
    return kind == EventKind::Switch || kind == EventKind::Retrain || kind == EventKind::VersionReuse;
  }
  bool operator==(const AdaptationEvent&) const = default;
};

inline bool trigger_consistent(const AdaptationEvent& e) noexcept {
  if (e.kind == EventKind::Retrain) return e.trigger == Trigger::Drift || e.trigger == Trigger::Periodic;
  if (e.kind == EventKind::VersionReuse) return e.trigger == Trigger::Drift;
  return true;
}

inline nlohmann::ordered_json to_json(const AdaptationEvent& e) {
  nlohmann::ordered_json j;
  j["interval"] = e.interval;
  j["kind"] = std::string(to_string(e.kind));
  j["trigger"] = std::string(to_string(e.trigger));
  j["from_model"] = e.from_model;
  j["to_model"] = e.to_model;
  j["detail"] = e.detail;
  j["loop_energy"] = e.loop_energy;
  return j;
}

inline AdaptationEvent event_from_json(const nlohmann::json& j) {
  try {
    AdaptationEvent e;
    e.interval = j.at("interval").get<std::size_t>();
    const auto kind = event_kind_from_string(j.at("kind").get<std::string>());
    const auto trig = trigger_from_string(j.at("trigger").get<std::string>());
    if (!kind || !trig) throw ParseError("unknown event kind or trigger");
    e.kind = *kind;
    e.trigger = *trig;
    e.from_model = j.at("from_model").get<std::string>();
    e.to_model = j.at("to_model").get<std::string>();
    e.detail = j.at("detail").get<std::string>();
    e.loop_energy = j.at("loop_energy").get<double>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("malformed event: ") + ex.what());
  }
}

/// Append-only audit log, serialized as JSON Lines.
class EventLog {
 public:
  void log_event(AdaptationEvent e) {
    if (!trigger_consistent(e))
      throw ValidationError("trigger", std::string(to_string(e.kind)) + " cannot be triggered by " +
                                           std::string(to_string(e.trigger)));
    events_.push_back(std::move(e));
  }

  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  const std::vector<AdaptationEvent>& events() const noexcept { return events_; }

  std::size_t count(EventKind k) const {
    return static_cast<std::size_t>(std::count_if(events_.begin(), events_.end(), [k](const auto& e) { return e.kind == k; }));
  }
  std::size_t adaptations() const {
    return static_cast<std::size_t>(std::count_if(events_.begin(), events_.end(), [](const auto& e) { return e.is_adaptation(); }));
  }

  void write_jsonl(std::ostream& out) const {
    for (const auto& e : events_) out << to_json(e).dump() << '\n';
  }
  std::string to_jsonl() const {
    std::ostringstream out;
    write_jsonl(out);
    return out.str();
  }

  static EventLog parse_jsonl(std::istream& in) {
    EventLog log;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        log.log_event(event_from_json(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
      }
    }
    return log;
  }

 private:
  std::vector<AdaptationEvent> events_;
};

}  // namespace harmone
