#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "proalloc/cf_tree.hpp"
#include "proalloc/cluster_feature.hpp"

namespace proalloc {

// What a partition publishes to its peers: the micro-clusters holding at
// least alpha vectors, with their centroids. When no leaf entry reaches alpha
// the synopsis falls back to the single root CF.
struct Synopsis {
  std::size_t partition = 0;  // zero-based partition index
  std::vector<ClusterFeature> dominant;
  std::vector<Vector> centroids;
  std::uint64_t version = 0;
  bool root_fallback = false;

  std::size_t dim() const { return centroids.empty() ? 0 : centroids.front().size(); }
};

// Builds a synopsis from explicit CFs (every CF must have L >= 1).
Synopsis make_synopsis(std::size_t partition, std::vector<ClusterFeature> dominant,
                       std::uint64_t version);

// Single-centroid synopsis, e.g. a plain mean vector.
Synopsis synopsis_from_mean(std::size_t partition, const Vector& mean,
                            std::uint64_t version = 0);

// Dominant list ordered by descending L, ties by leaf creation order.
// Throws EmptyCluster on an empty tree and ConfigError when alpha == 0.
Synopsis extract_synopsis(const CFTree& tree, std::uint64_t alpha,
                          std::size_t partition, std::uint64_t version);

}  // namespace proalloc
