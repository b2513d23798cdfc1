#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "proalloc/synopsis.hpp"

namespace proalloc {

// Abundance dissimilarities over non-negative vectors. All three are
// symmetric, bounded in [0, 1] and invariant under joint positive scaling.
// Negative or non-finite components raise DomainError / MalformedInput;
// differing sizes raise DimensionMismatch.

// 2*sum|x-s| / (sum x + sum s + sum|x-s|); 0 when both vectors are all-zero.
double jaccard_dissim(std::span<const double> x, std::span<const double> s);

// Bray-Curtis: sum|x-s| / (sum x + sum s); 0 when both are all-zero.
double sorensen_dissim(std::span<const double> x, std::span<const double> s);

// 1 - (sum min / sum x + sum min / sum s) / 2. One-sided zero mass gives 1,
// two-sided zero mass gives 0.
double kulczynski_dissim(std::span<const double> x, std::span<const double> s);

enum class Metric { kJaccard, kSorensen, kKulczynski };

inline constexpr std::array<Metric, 3> kMetrics{Metric::kJaccard, Metric::kSorensen,
                                               Metric::kKulczynski};

std::string_view metric_name(Metric m);

double dissimilarity(Metric m, std::span<const double> x, std::span<const double> s);

struct MetricOutcome {
  Metric metric = Metric::kJaccard;
  double dissimilarity = 0.0;
};

struct WeightVector {
  std::vector<double> weights;
  double theta = 0.1;
};

// Knobs of the outlier-aware linear opinion pool.
struct EnsembleParams {
  double theta = 0.1;  // weight of an outlying metric
  double k = 3.0;      // outlier cut-off in population standard deviations
};

// Throws ConfigError unless 0 < theta < 1/metric_count and k > 0.
void validate(const EnsembleParams& params, std::size_t metric_count = kMetrics.size());

// Metrics whose outcome lies more than k population standard deviations from
// the mean get theta each; the rest share what is left equally. Uniform when
// the deviation is zero or every metric is flagged.
WeightVector compute_weights(std::span<const double> outcomes, double theta, double k);

// Linear opinion pool: sum w_i * O_i. Throws DimensionMismatch on length
// mismatch.
double opinion_pool(std::span<const double> outcomes, const WeightVector& weights);

struct EnsembleScore {
  double pooled_dissimilarity = 0.0;
  double similarity = 1.0;
  std::vector<MetricOutcome> per_metric;
  WeightVector weights;
  std::size_t centroid = 0;  // index into Synopsis::centroids
};

// Scores x against one centroid.
EnsembleScore score_centroid(std::span<const double> x, std::span<const double> centroid,
                             const EnsembleParams& params);

// Best score over all dominant centroids (first centroid wins ties).
EnsembleScore ensemble_similarity(std::span<const double> x, const Synopsis& syn,
                                  const EnsembleParams& params);

}  // namespace proalloc
