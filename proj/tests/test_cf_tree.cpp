#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "proalloc/cf_tree.hpp"
#include "proalloc/errors.hpp"
#include "proalloc/synopsis.hpp"

using namespace proalloc;

namespace {

std::uint64_t leaf_mass(const CFTree& tree) {
  std::uint64_t total = 0;
  for (const auto& e : tree.leaf_entries()) total += e.cf->count;
  return total;
}

}  // namespace

TEST_CASE("first insertion creates a singleton leaf") {
  CFTree tree(2, 8, 1.0);
  const auto out = tree.insert(Vector{1.0, 2.0});
  CHECK_FALSE(out.absorbed);
  REQUIRE(tree.leaf_entry_count() == 1);
  CHECK(tree.leaf_entries()[0].cf->count == 1);
  CHECK(tree.height() == 1);
  CHECK(tree.size() == 1);
}

TEST_CASE("nearby points absorb into one micro-cluster") {
  CFTree tree(2, 8, 10.0);
  for (const Vector& p : {Vector{1, 1}, Vector{1, 3}, Vector{3, 3}}) tree.insert(p);
  REQUIRE(tree.leaf_entry_count() == 1);
  const ClusterFeature& cf = *tree.leaf_entries()[0].cf;
  CHECK(cf.count == 3);
  CHECK(cf.linear_sum == Vector{5.0, 7.0});
  CHECK(cf.square_sum == Vector{11.0, 19.0});
  CHECK(cf_radius(cf) == doctest::Approx(oracle::brute_radius({{1, 1}, {1, 3}, {3, 3}})));
  CHECK(cf_radius(cf) == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("a far point opens a new entry") {
  CFTree tree(2, 8, 1.0);
  tree.insert(Vector{0.0, 0.0});
  const auto out = tree.insert(Vector{100.0, 100.0});
  CHECK_FALSE(out.absorbed);
  CHECK(tree.leaf_entry_count() == 2);
}

TEST_CASE("insert rejects bad vectors without mutating") {
  CFTree tree(2, 4, 1.0);
  tree.insert(Vector{1.0, 1.0});
  CHECK_THROWS_AS(tree.insert(Vector{-1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(tree.insert(Vector{1.0}), DimensionMismatch);
  CHECK_THROWS_AS(tree.insert(Vector{1.0, std::nan("")}), MalformedInput);
  CHECK(tree.size() == 1);
  CHECK(leaf_mass(tree) == 1);
}

TEST_CASE("construction validates parameters") {
  CHECK_THROWS_AS(CFTree(0, 8, 1.0), ConfigError);
  CHECK_THROWS_AS(CFTree(2, 1, 1.0), ConfigError);
  CHECK_THROWS_AS(CFTree(2, 8, 0.0), ConfigError);
}

TEST_CASE("splits keep the tree balanced and consistent") {
  std::mt19937_64 rng(3);
  CFTree tree(3, 4, 0.5);
  std::vector<Vector> pts;
  for (int i = 0; i < 2000; ++i) {
    pts.push_back(oracle::random_vector(rng, 3, 50.0));
    tree.insert(pts.back());
    if (i % 97 == 0) CHECK(all_passed(tree.audit()));
  }
  CHECK(tree.height() > 2);
  CHECK(all_passed(tree.audit()));
  CHECK(leaf_mass(tree) == pts.size());

  // Root aggregate centroid equals the arithmetic mean of all points.
  const auto root = tree.root_cf();
  const auto brute = oracle::brute_cf(pts, 3);
  CHECK(root.count == pts.size());
  const Vector c = cf_centroid(root);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(oracle::rel_close(c[j], brute.ls[j] / static_cast<double>(pts.size()), 1e-9));
  }
}

TEST_CASE("identical points never overflow a split") {
  CFTree tree(2, 3, 1e-12);
  // Radius threshold is tiny but duplicates have radius 0 and always merge.
  for (int i = 0; i < 50; ++i) tree.insert(Vector{2.0, 2.0});
  CHECK(tree.leaf_entry_count() == 1);
  // Distinct points at the same spot as each other pairwise: forced splits.
  for (int i = 0; i < 30; ++i) tree.insert(Vector{static_cast<double>(i) * 10.0, 0.0});
  CHECK(all_passed(tree.audit()));
}

TEST_CASE("copies are deep") {
  CFTree a(2, 4, 0.1);
  for (int i = 0; i < 40; ++i) a.insert(Vector{static_cast<double>(i), 1.0});
  CFTree b = a;
  b.insert(Vector{500.0, 500.0});
  CHECK(a.size() == 40);
  CHECK(b.size() == 41);
  CHECK(all_passed(a.audit()));
  CHECK(all_passed(b.audit()));
}

TEST_CASE("audit catches a corrupted leaf") {
  CFTree tree(2, 4, 0.5);
  for (int i = 0; i < 100; ++i) tree.insert(Vector{static_cast<double>(i % 17), static_cast<double>(i % 5)});
  REQUIRE(tree.height() > 1);
  REQUIRE(all_passed(tree.audit()));
  tree.leaf_entry_for_testing(0).linear_sum[0] += 1000.0;
  const auto report = tree.audit();
  CHECK_FALSE(all_passed(report));
  bool internal_failed = false;
  for (const auto& c : report) {
    if (c.name == "tree.internal_consistency") internal_failed = !c.passed;
  }
  CHECK(internal_failed);
}

TEST_CASE("extract_synopsis keeps alpha-dominant leaves") {
  // Three well separated blobs of 500, 40 and 3 points.
  CFTree tree(2, 8, 1.0);
  for (int i = 0; i < 500; ++i) tree.insert(Vector{10.0, 10.0});
  for (int i = 0; i < 40; ++i) tree.insert(Vector{50.0, 10.0});
  for (int i = 0; i < 3; ++i) tree.insert(Vector{10.0, 90.0});
  REQUIRE(tree.leaf_entry_count() == 3);

  const auto syn = extract_synopsis(tree, 10, 2, 7);
  CHECK(syn.partition == 2);
  CHECK(syn.version == 7);
  CHECK_FALSE(syn.root_fallback);
  REQUIRE(syn.dominant.size() == 2);
  CHECK(syn.dominant[0].count == 500);
  CHECK(syn.dominant[1].count == 40);
  CHECK(syn.centroids[0] == Vector{10.0, 10.0});
  CHECK(syn.centroids[1] == Vector{50.0, 10.0});

  SUBCASE("alpha = 1 keeps everything") {
    CHECK(extract_synopsis(tree, 1, 0, 0).dominant.size() == 3);
  }

  SUBCASE("no leaf reaches alpha: root fallback") {
    const auto fb = extract_synopsis(tree, 1000, 0, 0);
    CHECK(fb.root_fallback);
    REQUIRE(fb.dominant.size() == 1);
    ClusterFeature sum(2);
    for (const auto& e : tree.leaf_entries()) sum += *e.cf;
    CHECK(fb.dominant[0].count == sum.count);
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(oracle::rel_close(fb.dominant[0].linear_sum[j], sum.linear_sum[j], 1e-12));
      CHECK(oracle::rel_close(fb.dominant[0].square_sum[j], sum.square_sum[j], 1e-12));
    }
  }
}

TEST_CASE("extract_synopsis orders equal counts by creation") {
  CFTree tree(1, 8, 0.5);
  for (double v : {30.0, 10.0, 20.0}) {
    for (int i = 0; i < 5; ++i) tree.insert(Vector{v});
  }
  const auto syn = extract_synopsis(tree, 5, 0, 0);
  REQUIRE(syn.centroids.size() == 3);
  CHECK(syn.centroids[0] == Vector{30.0});
  CHECK(syn.centroids[1] == Vector{10.0});
  CHECK(syn.centroids[2] == Vector{20.0});
}

TEST_CASE("extract_synopsis errors") {
  CFTree tree(2, 8, 1.0);
  CHECK_THROWS_AS(extract_synopsis(tree, 5, 0, 0), EmptyCluster);
  tree.insert(Vector{1.0, 1.0});
  CHECK_THROWS_AS(extract_synopsis(tree, 0, 0, 0), ConfigError);
}

TEST_CASE("property: synopsis never publishes a CF below alpha") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    CFTree tree(2, 5, 3.0);
    const int n = 50 + static_cast<int>(rng() % 500);
    for (int i = 0; i < n; ++i) tree.insert(oracle::random_vector(rng, 2, 30.0));
    const std::uint64_t alpha = 1 + rng() % 20;
    const auto syn = extract_synopsis(tree, alpha, 0, 0);
    if (syn.root_fallback) {
      CHECK(syn.dominant.size() == 1);
      CHECK(syn.dominant[0].count == tree.size());
    } else {
      for (const auto& cf : syn.dominant) CHECK(cf.count >= alpha);
    }
    for (std::size_t i = 0; i < syn.dominant.size(); ++i) {
      CHECK(syn.centroids[i] == cf_centroid(syn.dominant[i]));
    }
  }
}
