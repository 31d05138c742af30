#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "harmone/error.hpp"

namespace harmone {

inline constexpr double kHistogramSmoothing = 1e-6;

/// Equal-width histogram over a fixed reference range.
///
/// `edges` has bins+1 entries. `probs` is Laplace-smoothed, so every bin is
/// strictly positive and KL divergence between two histograms is finite.
struct Histogram {
  std::vector<double> edges;
  std::vector<double> probs;

  std::size_t bins() const noexcept { return probs.size(); }
  bool operator==(const Histogram&) const = default;
};

/// Equal-width edges over [lo, hi]. A degenerate range is widened by 0.5
/// on each side so that every value still has a bin.
inline std::vector<double> equal_width_edges(double lo, double hi, std::size_t bins) {
  if (bins < 2) throw ValidationError("histogram_bins", "need at least 2 bins");
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t k = 0; k <= bins; ++k) edges[k] = lo + width * static_cast<double>(k);
  edges[bins] = hi;
  return edges;
}

/// Edges spanning the min/max of a reference sample.
inline std::vector<double> edges_from_range(std::span<const double> reference, std::size_t bins) {
  if (reference.empty()) throw TooShortError("cannot derive histogram range from empty data");
  const auto [lo, hi] = std::minmax_element(reference.begin(), reference.end());
  return equal_width_edges(*lo, *hi, bins);
}

/// Bin of `v`; bins are half-open [e_k, e_k+1) and out-of-range values are
/// clamped to the end bins.
inline std::size_t bin_index(std::span<const double> edges, double v) {
  const auto inner_begin = edges.begin() + 1;
  const auto inner_end = edges.end() - 1;
  return static_cast<std::size_t>(std::upper_bound(inner_begin, inner_end, v) - inner_begin);
}

inline Histogram estimate_histogram(std::span<const double> values, std::span<const double> edges,
                                    double smoothing = kHistogramSmoothing) {
  if (edges.size() < 3) throw ValidationError("histogram_bins", "need at least 2 bins");
  if (values.empty()) throw TooShortError("histogram needs at least one value");
  const std::size_t bins = edges.size() - 1;
  std::vector<double> counts(bins, 0.0);
  for (double v : values) counts[bin_index(edges, v)] += 1.0;

  const double n = static_cast<double>(values.size());
  const double norm = 1.0 + smoothing * static_cast<double>(bins);
  Histogram h{std::vector<double>(edges.begin(), edges.end()), std::vector<double>(bins)};
  for (std::size_t k = 0; k < bins; ++k) h.probs[k] = (counts[k] / n + smoothing) / norm;
  return h;
}

inline bool bin_compatible(const Histogram& a, const Histogram& b) noexcept {
  return a.edges == b.edges && a.probs.size() == b.probs.size();
}

/// KL(p || q) in nats.
inline double kl_divergence(const Histogram& p, const Histogram& q) {
  if (!bin_compatible(p, q)) throw BinMismatchError("histograms have different bin edges");
  double d = 0.0;
  for (std::size_t k = 0; k < p.probs.size(); ++k) {
    const double pk = p.probs[k];
    if (pk > 0.0) d += pk * std::log(pk / q.probs[k]);
  }
  // Rounding can leave a tiny negative residue when p == q.
  return std::max(d, 0.0);
}

}  // namespace harmone
