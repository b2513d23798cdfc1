#include "proalloc/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "proalloc/errors.hpp"

namespace proalloc {
namespace {

constexpr double kClampTolerance = 1e-12;

void check_pair(std::span<const double> x, std::span<const double> s) {
  if (x.size() != s.size()) {
    throw DimensionMismatch("metric over vectors of dimension " + std::to_string(x.size()) +
                            " and " + std::to_string(s.size()));
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j]) || !std::isfinite(s[j])) {
      throw MalformedInput("non-finite component at index " + std::to_string(j));
    }
    if (x[j] < 0.0 || s[j] < 0.0) {
      throw DomainError("abundance metrics need non-negative components (index " +
                        std::to_string(j) + ")");
    }
  }
}

// Round-off can push a ratio marginally outside [0, 1].
double clamp_unit(double v) {
  if (v < 0.0 && v >= -kClampTolerance) return 0.0;
  if (v > 1.0 && v <= 1.0 + kClampTolerance) return 1.0;
  return std::clamp(v, 0.0, 1.0);
}

struct Sums {
  double x = 0.0;
  double s = 0.0;
  double abs_diff = 0.0;
  double min = 0.0;
};

Sums accumulate(std::span<const double> x, std::span<const double> s) {
  Sums out;
  for (std::size_t j = 0; j < x.size(); ++j) {
    out.x += x[j];
    out.s += s[j];
    out.abs_diff += std::abs(x[j] - s[j]);
    out.min += std::min(x[j], s[j]);
  }
  return out;
}

}  // namespace

double jaccard_dissim(std::span<const double> x, std::span<const double> s) {
  check_pair(x, s);
  const Sums t = accumulate(x, s);
  const double denom = t.x + t.s + t.abs_diff;
  if (denom == 0.0) return 0.0;
  return clamp_unit(2.0 * t.abs_diff / denom);
}

double sorensen_dissim(std::span<const double> x, std::span<const double> s) {
  check_pair(x, s);
  const Sums t = accumulate(x, s);
  const double denom = t.x + t.s;
  if (denom == 0.0) return 0.0;
  return clamp_unit(t.abs_diff / denom);
}

double kulczynski_dissim(std::span<const double> x, std::span<const double> s) {
  check_pair(x, s);
  const Sums t = accumulate(x, s);
  if (t.x == 0.0 && t.s == 0.0) return 0.0;
  if (t.x == 0.0 || t.s == 0.0) return 1.0;
  return clamp_unit(1.0 - 0.5 * (t.min / t.x + t.min / t.s));
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kJaccard:
      return "jaccard";
    case Metric::kSorensen:
      return "sorensen";
    case Metric::kKulczynski:
      return "kulczynski";
  }
  return "unknown";
}

double dissimilarity(Metric m, std::span<const double> x, std::span<const double> s) {
  switch (m) {
    case Metric::kJaccard:
      return jaccard_dissim(x, s);
    case Metric::kSorensen:
      return sorensen_dissim(x, s);
    case Metric::kKulczynski:
      return kulczynski_dissim(x, s);
  }
  throw ConfigError("unknown metric");
}

void validate(const EnsembleParams& params, std::size_t metric_count) {
  if (metric_count < 2) throw ConfigError("the ensemble needs at least two metrics");
  const double upper = 1.0 / static_cast<double>(metric_count);
  if (!(params.theta > 0.0) || !(params.theta < upper)) {
    throw ConfigError("theta must lie in (0, 1/" + std::to_string(metric_count) +
                      "), got " + std::to_string(params.theta));
  }
  if (!(params.k > 0.0) || !std::isfinite(params.k)) {
    throw ConfigError("outlier factor k must be positive");
  }
}

WeightVector compute_weights(std::span<const double> outcomes, double theta, double k) {
  const std::size_t n = outcomes.size();
  validate(EnsembleParams{theta, k}, n);

  const double count = static_cast<double>(n);
  const double mean = std::accumulate(outcomes.begin(), outcomes.end(), 0.0) / count;
  double var = 0.0;
  for (double o : outcomes) var += (o - mean) * (o - mean);
  const double dev = std::sqrt(var / count);

  WeightVector w{std::vector<double>(n, 1.0 / count), theta};
  if (dev == 0.0) return w;

  std::vector<bool> outlier(n, false);
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(outcomes[i] - mean) > k * dev) {
      outlier[i] = true;
      ++flagged;
    }
  }
  if (flagged == 0 || flagged == n) return w;

  const double share = (1.0 - static_cast<double>(flagged) * theta) /
                       static_cast<double>(n - flagged);
  for (std::size_t i = 0; i < n; ++i) w.weights[i] = outlier[i] ? theta : share;
  return w;
}

double opinion_pool(std::span<const double> outcomes, const WeightVector& weights) {
  if (outcomes.size() != weights.weights.size()) {
    throw DimensionMismatch("opinion pool: " + std::to_string(outcomes.size()) +
                            " outcomes vs " + std::to_string(weights.weights.size()) +
                            " weights");
  }
  double pooled = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) pooled += weights.weights[i] * outcomes[i];
  return clamp_unit(pooled);
}

EnsembleScore score_centroid(std::span<const double> x, std::span<const double> centroid,
                             const EnsembleParams& params) {
  std::array<double, kMetrics.size()> values{};
  EnsembleScore score;
  score.per_metric.reserve(kMetrics.size());
  for (std::size_t i = 0; i < kMetrics.size(); ++i) {
    values[i] = dissimilarity(kMetrics[i], x, centroid);
    score.per_metric.push_back({kMetrics[i], values[i]});
  }
  score.weights = compute_weights(values, params.theta, params.k);
  score.pooled_dissimilarity = opinion_pool(values, score.weights);
  score.similarity = 1.0 - score.pooled_dissimilarity;
  return score;
}

EnsembleScore ensemble_similarity(std::span<const double> x, const Synopsis& syn,
                                  const EnsembleParams& params) {
  if (syn.centroids.empty()) throw EmptyCluster("synopsis without centroids");
  EnsembleScore best;
  for (std::size_t c = 0; c < syn.centroids.size(); ++c) {
    EnsembleScore s = score_centroid(x, syn.centroids[c], params);
    s.centroid = c;
    if (c == 0 || s.similarity > best.similarity) best = std::move(s);
  }
  return best;
}

}  // namespace proalloc
