#pragma once

// Randomized invariant checks and brute-force equation oracles shared by the
// property tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "harmone/analyzer.hpp"
#include "harmone/monitor.hpp"
#include "harmone/planner.hpp"

namespace harmone::check {

struct PropertyResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t violations = 0;
};

struct OracleResult {
  std::string name;
  std::size_t cases = 0;
  double max_error = 0.0;
  double tolerance = 0.0;

  bool ok() const { return max_error <= tolerance; }
};

// --- brute-force oracles ------------------------------------------------------

inline long double oracle_r2(const std::vector<double>& y, const std::vector<double>& yhat) {
  long double mean = 0;
  for (double v : y) mean += v;
  mean /= y.size();
  long double res = 0, tot = 0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    res += (static_cast<long double>(y[k]) - yhat[k]) * (static_cast<long double>(y[k]) - yhat[k]);
    tot += (y[k] - mean) * (y[k] - mean);
  }
  return 1.0L - res / tot;
}

inline long double oracle_kl(const std::vector<long double>& p, const std::vector<long double>& q) {
  long double d = 0;
  for (std::size_t k = 0; k < p.size(); ++k) d += p[k] * std::log(p[k] / q[k]);
  return d;
}

// Counts, then adds 1e-6 to every bin's relative frequency and renormalizes.
inline std::vector<long double> oracle_histogram(const std::vector<double>& values, double lo, double hi,
                                                 std::size_t bins) {
  std::vector<long double> counts(bins, 0.0L);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    long long b = static_cast<long long>(std::floor((v - lo) / width));
    b = std::clamp<long long>(b, 0, static_cast<long long>(bins) - 1);
    counts[static_cast<std::size_t>(b)] += 1;
  }
  long double sum = 0;
  for (auto& c : counts) {
    c = c / values.size() + 1e-6L;
    sum += c;
  }
  for (auto& c : counts) c /= sum;
  return counts;
}

inline OracleResult oracle_performance_score(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  OracleResult r{"performance_score", n, 0.0, 1e-12};
  for (std::size_t k = 0; k < n; ++k) {
    const double a = rng.uniform(), e = rng.uniform(0.0, 2.0), beta = rng.uniform();
    const double ec = e > 1.0 ? 1.0 : e;
    const long double want = static_cast<long double>(beta) * a + (1.0L - beta) * (1.0L - ec);
    r.max_error = std::max(r.max_error, static_cast<double>(std::abs(performance_score(a, clamp01(e), beta) - want)));
  }
  return r;
}

inline OracleResult oracle_update_ema(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  OracleResult r{"update_ema", n, 0.0, 1e-12};
  for (std::size_t k = 0; k < n; ++k) {
    const double prev = rng.uniform(), s = rng.uniform(), g = 1.0 - rng.uniform();
    const long double want = static_cast<long double>(g) * s + (1.0L - g) * prev;
    r.max_error = std::max(r.max_error, static_cast<double>(std::abs(update_ema(prev, s, g) - want)));
  }
  return r;
}

inline OracleResult oracle_energy_threshold(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  OracleResult r{"update_energy_threshold", n, 0.0, 1e-12};
  for (std::size_t k = 0; k < n; ++k) {
    SustainabilityGoals g;
    const double lo = rng.uniform(0.0, 0.5), hi = rng.uniform(0.5, 1.0);
    g.tau_e_bounds = {lo, hi};
    g.delta = rng.uniform(0.01, 0.99);
    g.e_ref = rng.uniform(0.05, 1.0);
    const double tau = rng.uniform(lo, hi), e = rng.uniform(0.0, 1.5);
    long double raw = tau + static_cast<long double>(g.delta) * (g.e_ref - static_cast<long double>(e));
    if (raw < lo) raw = lo;
    if (raw > hi) raw = hi;
    const double got = update_energy_threshold(ThresholdState{tau, {}}, k, e, g).tau_e;
    r.max_error = std::max(r.max_error, static_cast<double>(std::abs(got - raw)));
  }
  return r;
}

inline OracleResult oracle_r_squared(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  OracleResult r{"r_squared", n, 0.0, 1e-12};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t len = 2 + rng.index(200);
    std::vector<double> y(len), yhat(len);
    const double noise = rng.uniform(0.0, 100.0);
    for (std::size_t i = 0; i < len; ++i) {
      y[i] = rng.uniform(0.0, 400.0);
      yhat[i] = y[i] + rng.normal(0.0, noise);
    }
    const long double want = oracle_r2(y, yhat);
    // Relative to the magnitude, since badly wrong predictions give large negative R2.
    const double scale = std::max(1.0L, std::abs(want));
    r.max_error = std::max(r.max_error, static_cast<double>(std::abs(r_squared(y, yhat) - want) / scale));
  }
  return r;
}

inline OracleResult oracle_kl_divergence(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  OracleResult r{"kl_divergence", n, 0.0, 1e-9};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t bins = 2 + rng.index(30);
    const double lo = rng.uniform(-50.0, 50.0), hi = lo + rng.uniform(1.0, 500.0);
    auto draw = [&] {
      std::vector<double> v(1 + rng.index(300));
      const double c = rng.uniform(lo, hi), s = rng.uniform(1.0, hi - lo);
      for (double& x : v) x = rng.normal(c, s);
      return v;
    };
    const auto a = draw(), b = draw();
    const auto edges = equal_width_edges(lo, hi, bins);
    const double got = kl_divergence(estimate_histogram(a, edges), estimate_histogram(b, edges));
    const long double want = oracle_kl(oracle_histogram(a, lo, hi, bins), oracle_histogram(b, lo, hi, bins));
    r.max_error = std::max(r.max_error, static_cast<double>(std::abs(got - want)));
  }
  return r;
}

inline std::vector<OracleResult> equation_oracles(std::size_t n, std::uint64_t seed) {
  return {oracle_performance_score(n, seed), oracle_update_ema(n, seed + 1), oracle_energy_threshold(n, seed + 2),
          oracle_r_squared(n, seed + 3), oracle_kl_divergence(n, seed + 4)};
}

// --- invariants ------------------------------------------------------------------

inline PropertyResult ema_convexity(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PropertyResult r{"EMA convexity", n, 0};
  for (std::size_t k = 0; k < n; ++k) {
    const double prev = rng.uniform(), s = rng.uniform(), g = 1.0 - rng.uniform();
    const double e = update_ema(prev, s, g);
    if (e < std::min(prev, s) || e > std::max(prev, s)) ++r.violations;
  }
  return r;
}

inline PropertyResult score_in_unit_interval(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PropertyResult r{"S_i in [0,1]", n, 0};
  for (std::size_t k = 0; k < n; ++k) {
    SustainabilityGoals g;
    g.beta = rng.uniform();
    std::vector<ObservationRecord> recs(2 + rng.index(30));
    const double err = rng.uniform(0.0, 300.0);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const double y = rng.uniform(0.0, 400.0);
      recs[i] = {i, y, y + rng.normal(0.0, err), "m", rng.uniform(0.0, 40.0)};
    }
    MonitorInputs in;
    in.records = recs;
    in.e_max = rng.uniform(10.0, 1200.0);
    const IntervalMetrics m = aggregate_interval(k, in, g);
    if (!(m.s_i >= 0.0 && m.s_i <= 1.0) || !(m.a_i >= 0.0 && m.a_i <= 1.0)) ++r.violations;
  }
  return r;
}

inline PropertyResult kl_nonnegative(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PropertyResult r{"KL >= 0", n, 0};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t bins = 2 + rng.index(40);
    const auto edges = equal_width_edges(0.0, 1.0, bins);
    auto draw = [&] {
      std::vector<double> v(1 + rng.index(100));
      const double c = rng.uniform(), s = rng.uniform(0.01, 1.0);
      for (double& x : v) x = rng.normal(c, s);
      return estimate_histogram(v, edges);
    };
    const Histogram p = draw();
    const Histogram q = rng.uniform() < 0.1 ? p : draw();
    if (!(kl_divergence(p, q) >= 0.0)) ++r.violations;
  }
  return r;
}

inline PropertyResult threshold_in_bounds(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PropertyResult r{"tau_E in [tau_min, tau_max]", n, 0};
  for (std::size_t k = 0; k < n; ++k) {
    SustainabilityGoals g;
    const double lo = rng.uniform(0.0, 0.6);
    g.tau_e_bounds = {lo, rng.uniform(lo, 1.0)};
    g.tau_e_init = rng.uniform(g.tau_min(), g.tau_max());
    g.delta = rng.uniform(0.001, 0.999);
    g.e_ref = rng.uniform(0.01, 1.0);
    ThresholdState s = ThresholdState::initial(g);
    const std::size_t steps = 1 + rng.index(50);
    for (std::size_t i = 0; i < steps; ++i) {
      s = update_energy_threshold(std::move(s), i, rng.uniform(0.0, 3.0), g);
      if (s.tau_e < g.tau_min() || s.tau_e > g.tau_max()) {
        ++r.violations;
        break;
      }
    }
  }
  return r;
}

inline PropertyResult exploit_never_active(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PropertyResult r{"exploit never selects active", n, 0};
  for (std::size_t k = 0; k < n; ++k) {
    ModelScoreBoard b;
    const std::size_t m = 2 + rng.index(5);
    for (std::size_t i = 0; i < m; ++i) {
      // Coarse EMAs and costs so ties are common.
      b.entries.push_back({"m" + std::to_string(i), static_cast<double>(rng.index(4)) / 4.0,
                           static_cast<double>(1 + rng.index(2))});
    }
    b.active = b.entries[rng.index(m)].id;
    if (select_exploit(b) == b.active) ++r.violations;
  }
  return r;
}

inline PropertyResult vmr_capacity_bound(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PropertyResult r{"VMR capacity bound", n, 0};
  TrainedModel model;
  model.params = LinearParams{};
  const Histogram h{equal_width_edges(0.0, 1.0, 2), {0.5, 0.5}};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t cap = 1 + rng.index(20);
    VersionedModelRepository vmr(cap);
    const std::size_t stores = rng.index(3 * cap + 2);
    bool bad = false;
    for (std::size_t i = 0; i < stores; ++i) {
      const std::string id = vmr.store_version(model, h, i);
      bad |= vmr.size() > cap || id != "v" + std::to_string(i + 1);
    }
    bad |= vmr.size() != std::min(cap, stores);
    if (bad) ++r.violations;
  }
  return r;
}

inline std::vector<PropertyResult> invariant_suite(std::size_t n, std::uint64_t seed) {
  return {ema_convexity(n, seed),      score_in_unit_interval(n, seed + 1), kl_nonnegative(n, seed + 2),
          threshold_in_bounds(n, seed + 3), exploit_never_active(n, seed + 4), vmr_capacity_bound(n, seed + 5)};
}

}  // namespace harmone::check
