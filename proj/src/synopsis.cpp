#include "proalloc/synopsis.hpp"

#include <algorithm>

#include "proalloc/errors.hpp"

namespace proalloc {

Synopsis make_synopsis(std::size_t partition, std::vector<ClusterFeature> dominant,
                       std::uint64_t version) {
  if (dominant.empty()) throw EmptyCluster("synopsis needs at least one cluster");
  Synopsis syn;
  syn.partition = partition;
  syn.version = version;
  syn.centroids.reserve(dominant.size());
  for (const auto& cf : dominant) {
    if (cf.dim() != dominant.front().dim()) {
      throw DimensionMismatch("synopsis clusters of differing dimension");
    }
    syn.centroids.push_back(cf_centroid(cf));
  }
  syn.dominant = std::move(dominant);
  return syn;
}

Synopsis synopsis_from_mean(std::size_t partition, const Vector& mean,
                            std::uint64_t version) {
  return make_synopsis(partition, {cf_from_point(mean)}, version);
}

Synopsis extract_synopsis(const CFTree& tree, std::uint64_t alpha,
                          std::size_t partition, std::uint64_t version) {
  if (alpha == 0) throw ConfigError("alpha must be a positive integer");
  if (tree.empty()) throw EmptyCluster("cannot extract a synopsis from an empty tree");

  std::vector<LeafEntryView> kept;
  for (const auto& view : tree.leaf_entries()) {
    if (view.cf->count >= alpha) kept.push_back(view);
  }
  std::sort(kept.begin(), kept.end(), [](const LeafEntryView& a, const LeafEntryView& b) {
    if (a.cf->count != b.cf->count) return a.cf->count > b.cf->count;
    return a.id < b.id;
  });

  std::vector<ClusterFeature> dominant;
  bool fallback = false;
  if (kept.empty()) {
    dominant.push_back(tree.root_cf());
    fallback = true;
  } else {
    dominant.reserve(kept.size());
    for (const auto& view : kept) dominant.push_back(*view.cf);
  }
  Synopsis syn = make_synopsis(partition, std::move(dominant), version);
  syn.root_fallback = fallback;
  return syn;
}

}  // namespace proalloc
