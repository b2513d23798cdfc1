#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "proalloc/audit.hpp"
#include "proalloc/cluster_feature.hpp"

namespace proalloc {

// Result of a single tree insertion.
struct InsertOutcome {
  bool absorbed = false;        // merged into an existing leaf entry
  std::uint64_t leaf_id = 0;    // creation sequence number of that entry
  bool split = false;           // at least one node split on the way back up
};

// Read-only view of one leaf-level micro-cluster.
struct LeafEntryView {
  const ClusterFeature* cf = nullptr;
  std::uint64_t id = 0;  // creation order, stable across splits
};

// Height-balanced BIRCH-style CF-tree. Leaf entries are micro-clusters whose
// radius never exceeds `threshold`; every internal entry holds the sum of the
// CFs found in its child node. Single writer; copies are deep.
class CFTree {
 public:
  CFTree(std::size_t dim, std::size_t branching, double threshold);
  ~CFTree();

  CFTree(const CFTree& other);
  CFTree& operator=(const CFTree& other);
  CFTree(CFTree&&) noexcept;
  CFTree& operator=(CFTree&&) noexcept;

  // Rejects non-finite (MalformedInput), negative (DomainError) and
  // wrong-sized (DimensionMismatch) vectors without touching the tree.
  InsertOutcome insert(std::span<const double> x);

  std::size_t dim() const { return dim_; }
  std::size_t branching() const { return branching_; }
  double threshold() const { return threshold_; }
  std::uint64_t size() const { return inserted_; }
  bool empty() const { return inserted_ == 0; }
  std::size_t height() const;
  std::size_t leaf_entry_count() const;

  // Sum of the root entries.
  ClusterFeature root_cf() const;

  // Leaf entries in left-to-right tree order.
  std::vector<LeafEntryView> leaf_entries() const;

  // Full structural audit: mass conservation, internal-node sums, leaf radii,
  // branching bound, uniform leaf depth and per-CF consistency.
  AuditReport audit() const;

  // Mutable access to the i-th leaf entry (tree order). Only meant for fault
  // injection in tests of audit().
  ClusterFeature& leaf_entry_for_testing(std::size_t i);

  struct Node;  // opaque

 private:
  // Both return the new right sibling when `node` overflowed, else null.
  std::unique_ptr<Node> insert_into(Node& node, std::span<const double> x,
                                    const ClusterFeature& point,
                                    InsertOutcome& outcome);
  std::unique_ptr<Node> split_node(Node& node);

  std::size_t dim_;
  std::size_t branching_;
  double threshold_;
  std::uint64_t inserted_ = 0;
  std::uint64_t next_leaf_id_ = 0;
  std::unique_ptr<Node> root_;
};

}  // namespace proalloc
