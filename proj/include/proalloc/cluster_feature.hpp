#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace proalloc {

using Vector = std::vector<double>;

// Cluster feature {L, LS, SS}: point count, per-dimension linear sum and
// per-dimension square sum. Two CFs of the same dimension merge by addition.
struct ClusterFeature {
  std::uint64_t count = 0;
  Vector linear_sum;
  Vector square_sum;

  ClusterFeature() = default;
  // Empty CF (L = 0) of dimension `dim`.
  explicit ClusterFeature(std::size_t dim);

  std::size_t dim() const { return linear_sum.size(); }
  bool empty() const { return count == 0; }

  // In-place merge; throws DimensionMismatch.
  ClusterFeature& operator+=(const ClusterFeature& other);

  friend bool operator==(const ClusterFeature&, const ClusterFeature&) = default;
};

// Throws MalformedInput when any component is non-finite.
ClusterFeature cf_from_point(std::span<const double> x);

ClusterFeature cf_merge(const ClusterFeature& a, const ClusterFeature& b);

// LS / L. Throws EmptyCluster when L = 0.
Vector cf_centroid(const ClusterFeature& cf);

// RMS distance of the absorbed points to their centroid, clamped at 0.
double cf_radius(const ClusterFeature& cf);

// Per-dimension population variance SS/L - (LS/L)^2, clamped at 0.
Vector cf_variance(const ClusterFeature& cf);

// Checks L = 0 => zero sums, equal field sizes and SS*L >= LS^2 - eps per
// dimension (relative to the magnitude of the terms).
bool cf_is_consistent(const ClusterFeature& cf, double eps = 1e-9);

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace proalloc
