#include "proalloc/cluster_feature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "proalloc/errors.hpp"

namespace proalloc {

ClusterFeature::ClusterFeature(std::size_t dim)
    : linear_sum(dim, 0.0), square_sum(dim, 0.0) {}

ClusterFeature& ClusterFeature::operator+=(const ClusterFeature& other) {
  if (other.dim() != dim() || other.square_sum.size() != square_sum.size()) {
    throw DimensionMismatch("cluster feature merge: dimension " +
                            std::to_string(dim()) + " vs " +
                            std::to_string(other.dim()));
  }
  count += other.count;
  for (std::size_t j = 0; j < linear_sum.size(); ++j) {
    linear_sum[j] += other.linear_sum[j];
    square_sum[j] += other.square_sum[j];
  }
  return *this;
}

ClusterFeature cf_from_point(std::span<const double> x) {
  ClusterFeature cf(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) {
      throw MalformedInput("non-finite component at index " +
                           std::to_string(j));
    }
    cf.linear_sum[j] = x[j];
    cf.square_sum[j] = x[j] * x[j];
  }
  cf.count = 1;
  return cf;
}

ClusterFeature cf_merge(const ClusterFeature& a, const ClusterFeature& b) {
  ClusterFeature out = a;
  out += b;
  return out;
}

Vector cf_centroid(const ClusterFeature& cf) {
  if (cf.count == 0) throw EmptyCluster("centroid of an empty cluster");
  const double n = static_cast<double>(cf.count);
  Vector c(cf.dim());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = cf.linear_sum[j] / n;
  return c;
}

double cf_radius(const ClusterFeature& cf) {
  if (cf.count == 0) throw EmptyCluster("radius of an empty cluster");
  const double n = static_cast<double>(cf.count);
  double ss = 0.0;
  double centroid_norm = 0.0;
  for (std::size_t j = 0; j < cf.dim(); ++j) {
    ss += cf.square_sum[j] / n;
    const double c = cf.linear_sum[j] / n;
    centroid_norm += c * c;
  }
  return std::sqrt(std::max(0.0, ss - centroid_norm));
}

Vector cf_variance(const ClusterFeature& cf) {
  if (cf.count == 0) throw EmptyCluster("variance of an empty cluster");
  const double n = static_cast<double>(cf.count);
  Vector v(cf.dim());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double mean = cf.linear_sum[j] / n;
    v[j] = std::max(0.0, cf.square_sum[j] / n - mean * mean);
  }
  return v;
}

bool cf_is_consistent(const ClusterFeature& cf, double eps) {
  if (cf.linear_sum.size() != cf.square_sum.size()) return false;
  for (std::size_t j = 0; j < cf.dim(); ++j) {
    const double ls = cf.linear_sum[j];
    const double ss = cf.square_sum[j];
    if (!std::isfinite(ls) || !std::isfinite(ss)) return false;
    if (cf.count == 0) {
      if (ls != 0.0 || ss != 0.0) return false;
      continue;
    }
    if (ss < 0.0) return false;
    // SS*L >= LS^2, compared as a per-point variance with a scale-relative
    // tolerance.
    const double n = static_cast<double>(cf.count);
    const double mean = ls / n;
    const double var = ss / n - mean * mean;
    const double scale = std::max(1.0, ss / n);
    if (var < -eps * scale) return false;
  }
  return true;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("distance between vectors of dimension " +
                            std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
  }
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    d += diff * diff;
  }
  return d;
}

}  // namespace proalloc
