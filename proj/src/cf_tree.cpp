#include "proalloc/cf_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "proalloc/errors.hpp"

namespace proalloc {

struct CFTree::Node {
  struct Entry {
    ClusterFeature cf;
    std::unique_ptr<Node> child;  // null in leaves
    std::uint64_t id = 0;         // leaf entries only
  };

  bool is_leaf = true;
  std::vector<Entry> entries;

  std::unique_ptr<Node> clone() const {
    auto copy = std::make_unique<Node>();
    copy->is_leaf = is_leaf;
    copy->entries.reserve(entries.size());
    for (const auto& e : entries) {
      copy->entries.push_back(
          Entry{e.cf, e.child ? e.child->clone() : nullptr, e.id});
    }
    return copy;
  }

  ClusterFeature sum(std::size_t dim) const {
    ClusterFeature total(dim);
    for (const auto& e : entries) total += e.cf;
    return total;
  }
};

namespace {

using Node = CFTree::Node;

// Index of the entry whose centroid is nearest to x; lowest index on ties.
std::size_t nearest_entry(const std::vector<Node::Entry>& entries,
                          std::span<const double> x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double d = squared_distance(x, cf_centroid(entries[i].cf));
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

bool close_enough(double a, double b, double rel) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= rel * scale;
}

}  // namespace

CFTree::CFTree(std::size_t dim, std::size_t branching, double threshold)
    : dim_(dim), branching_(branching), threshold_(threshold),
      root_(std::make_unique<Node>()) {
  if (dim == 0) throw ConfigError("CF-tree dimension must be positive");
  if (branching < 2) throw ConfigError("CF-tree branching factor must be >= 2");
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw ConfigError("CF-tree leaf threshold must be a positive real");
  }
}

CFTree::~CFTree() = default;
CFTree::CFTree(CFTree&&) noexcept = default;
CFTree& CFTree::operator=(CFTree&&) noexcept = default;

CFTree::CFTree(const CFTree& other)
    : dim_(other.dim_), branching_(other.branching_),
      threshold_(other.threshold_), inserted_(other.inserted_),
      next_leaf_id_(other.next_leaf_id_), root_(other.root_->clone()) {}

CFTree& CFTree::operator=(const CFTree& other) {
  if (this != &other) {
    CFTree copy(other);
    *this = std::move(copy);
  }
  return *this;
}

InsertOutcome CFTree::insert(std::span<const double> x) {
  if (x.size() != dim_) {
    throw DimensionMismatch("tree of dimension " + std::to_string(dim_) +
                            " cannot take a vector of dimension " +
                            std::to_string(x.size()));
  }
  const ClusterFeature point = cf_from_point(x);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] < 0.0) {
      throw DomainError("negative component at index " + std::to_string(j));
    }
  }

  InsertOutcome outcome;
  if (auto sibling = insert_into(*root_, x, point, outcome)) {
    auto new_root = std::make_unique<Node>();
    new_root->is_leaf = false;
    ClusterFeature left = root_->sum(dim_);
    ClusterFeature right = sibling->sum(dim_);
    new_root->entries.push_back({std::move(left), std::move(root_), 0});
    new_root->entries.push_back({std::move(right), std::move(sibling), 0});
    root_ = std::move(new_root);
    outcome.split = true;
  }
  ++inserted_;
  return outcome;
}

std::unique_ptr<CFTree::Node> CFTree::insert_into(Node& node,
                                                  std::span<const double> x,
                                                  const ClusterFeature& point,
                                                  InsertOutcome& outcome) {
  if (node.is_leaf) {
    if (!node.entries.empty()) {
      const std::size_t i = nearest_entry(node.entries, x);
      ClusterFeature merged = cf_merge(node.entries[i].cf, point);
      if (cf_radius(merged) <= threshold_) {
        node.entries[i].cf = std::move(merged);
        outcome.absorbed = true;
        outcome.leaf_id = node.entries[i].id;
        return nullptr;
      }
    }
    outcome.leaf_id = next_leaf_id_++;
    node.entries.push_back({point, nullptr, outcome.leaf_id});
    if (node.entries.size() > branching_) {
      outcome.split = true;
      return split_node(node);
    }
    return nullptr;
  }

  const std::size_t i = nearest_entry(node.entries, x);
  auto& entry = node.entries[i];
  auto sibling = insert_into(*entry.child, x, point, outcome);
  if (!sibling) {
    entry.cf += point;
    return nullptr;
  }
  entry.cf = entry.child->sum(dim_);
  ClusterFeature sibling_cf = sibling->sum(dim_);
  node.entries.insert(node.entries.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                      Node::Entry{std::move(sibling_cf), std::move(sibling), 0});
  if (node.entries.size() > branching_) return split_node(node);
  return nullptr;
}

// Farthest-pair seeding: the two entries with maximal centroid distance seed
// the halves; every other entry joins the nearer seed (first seed on ties).
// Relative order is preserved within each half.
std::unique_ptr<CFTree::Node> CFTree::split_node(Node& node) {
  const std::size_t n = node.entries.size();
  std::vector<Vector> centroids;
  centroids.reserve(n);
  for (const auto& e : node.entries) centroids.push_back(cf_centroid(e.cf));

  std::size_t seed_a = 0;
  std::size_t seed_b = 1;
  double widest = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = squared_distance(centroids[i], centroids[j]);
      if (d > widest) {
        widest = d;
        seed_a = i;
        seed_b = j;
      }
    }
  }

  auto sibling = std::make_unique<Node>();
  sibling->is_leaf = node.is_leaf;
  std::vector<Node::Entry> kept;
  for (std::size_t i = 0; i < n; ++i) {
    bool to_sibling = i == seed_b;
    if (i != seed_a && i != seed_b) {
      to_sibling = squared_distance(centroids[i], centroids[seed_b]) <
                   squared_distance(centroids[i], centroids[seed_a]);
    }
    (to_sibling ? sibling->entries : kept).push_back(std::move(node.entries[i]));
  }
  node.entries = std::move(kept);
  return sibling;
}

std::size_t CFTree::height() const {
  std::size_t h = 1;
  for (const Node* n = root_.get(); !n->is_leaf; n = n->entries.front().child.get()) {
    ++h;
  }
  return h;
}

std::size_t CFTree::leaf_entry_count() const { return leaf_entries().size(); }

ClusterFeature CFTree::root_cf() const { return root_->sum(dim_); }

std::vector<LeafEntryView> CFTree::leaf_entries() const {
  std::vector<LeafEntryView> out;
  std::vector<const Node*> stack{root_.get()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (n->is_leaf) {
      for (const auto& e : n->entries) out.push_back({&e.cf, e.id});
      continue;
    }
    for (auto it = n->entries.rbegin(); it != n->entries.rend(); ++it) {
      stack.push_back(it->child.get());
    }
  }
  return out;
}

ClusterFeature& CFTree::leaf_entry_for_testing(std::size_t i) {
  auto views = leaf_entries();
  if (i >= views.size()) throw ConfigError("leaf entry index out of range");
  return const_cast<ClusterFeature&>(*views[i].cf);
}

AuditReport CFTree::audit() const {
  constexpr double kRel = 1e-9;
  bool sums_ok = true;
  bool radius_ok = true;
  bool fanout_ok = true;
  bool depth_ok = true;
  bool cf_ok = true;
  std::string sums_detail;
  std::uint64_t leaf_mass = 0;
  std::size_t leaf_depth = 0;

  struct Frame {
    const Node* node;
    std::size_t depth;
  };
  std::vector<Frame> stack{{root_.get(), 1}};
  while (!stack.empty()) {
    const auto [node, depth] = stack.back();
    stack.pop_back();
    if (node->entries.size() > branching_) fanout_ok = false;
    if (node != root_.get() && node->entries.empty()) fanout_ok = false;
    for (const auto& e : node->entries) {
      if (!cf_is_consistent(e.cf) || e.cf.dim() != dim_) cf_ok = false;
    }
    if (node->is_leaf) {
      if (leaf_depth == 0) leaf_depth = depth;
      if (depth != leaf_depth) depth_ok = false;
      for (const auto& e : node->entries) {
        leaf_mass += e.cf.count;
        if (e.cf.count > 1 && cf_radius(e.cf) > threshold_ * (1.0 + kRel)) {
          radius_ok = false;
        }
      }
      continue;
    }
    for (const auto& e : node->entries) {
      if (!e.child) {
        sums_ok = false;
        sums_detail = "internal entry without child";
        continue;
      }
      const ClusterFeature expect = e.child->sum(dim_);
      bool match = expect.count == e.cf.count && e.cf.dim() == dim_;
      for (std::size_t j = 0; match && j < dim_; ++j) {
        match = close_enough(e.cf.linear_sum[j], expect.linear_sum[j], kRel) &&
                close_enough(e.cf.square_sum[j], expect.square_sum[j], kRel);
      }
      if (!match) {
        sums_ok = false;
        sums_detail = "internal CF differs from the sum of its child";
      }
      stack.push_back({e.child.get(), depth + 1});
    }
  }

  const std::uint64_t root_mass = root_cf().count;
  AuditReport report;
  report.push_back({"tree.mass_conservation",
                    leaf_mass == inserted_ && root_mass == inserted_,
                    "leaf mass " + std::to_string(leaf_mass) + ", root mass " +
                        std::to_string(root_mass) + ", inserted " +
                        std::to_string(inserted_)});
  report.push_back({"tree.internal_consistency", sums_ok, sums_detail});
  report.push_back({"tree.leaf_radius", radius_ok, ""});
  report.push_back({"tree.branching_bound", fanout_ok, ""});
  report.push_back({"tree.balanced", depth_ok, ""});
  report.push_back({"tree.cf_invariants", cf_ok, ""});
  return report;
}

}  // namespace proalloc
