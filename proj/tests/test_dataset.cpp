#include <cmath>
#include <set>

#include "doctest.h"
#include "proalloc/dataset.hpp"
#include "proalloc/errors.hpp"

using namespace proalloc;

namespace {

std::filesystem::path fixture(const char* name) {
  return std::filesystem::path(PROALLOC_FIXTURES) / name;
}

}  // namespace

TEST_CASE("canonical column names") {
  CHECK(canonical_column("CO(GT)") == "CO_GT");
  CHECK(canonical_column("NOx(GT)") == "NOX_GT");
  CHECK(canonical_column(" C6H6(GT) ") == "C6H6_GT");
  CHECK(canonical_column("NO2_GT") == "NO2_GT");
  CHECK(canonical_column("PT08.S1(CO)") == "PT08_S1_CO");
}

TEST_CASE("plain three-row fixture loads exactly") {
  const Dataset ds = load_air_quality(fixture("plain3.csv"));
  REQUIRE(ds.size() == 3);
  CHECK(ds.dim() == 5);
  CHECK(ds.dimension_names ==
        std::vector<std::string>{"CO_GT", "NMHC_GT", "C6H6_GT", "NOX_GT", "NO2_GT"});
  CHECK(ds.rows[0] == Vector{2.6, 150.0, 11.9, 166.0, 113.0});
  CHECK(ds.rows[1] == Vector{2.0, 112.0, 9.4, 103.0, 92.0});
  CHECK(ds.rows[2] == Vector{2.2, 88.0, 9.0, 131.0, 114.0});
  CHECK(ds.dropped_missing == 0);
  CHECK(ds.dropped_malformed == 0);
}

TEST_CASE("published layout with decimal commas and sentinels") {
  const Dataset ds = load_air_quality(fixture("published_sample.csv"));
  REQUIRE(ds.size() == 3);
  CHECK(ds.rows[0] == Vector{2.6, 150.0, 11.9, 166.0, 113.0});
  CHECK(ds.rows[1] == Vector{2.0, 112.0, 9.4, 103.0, 92.0});
  CHECK(ds.rows[2] == Vector{1.6, 51.0, 6.5, 131.0, 116.0});
  CHECK(ds.dropped_missing == 2);
}

TEST_CASE("load errors") {
  CHECK_THROWS_AS(load_air_quality(fixture("does_not_exist.csv")), FileUnreadable);
  CHECK_THROWS_AS(load_air_quality(fixture("all_missing.csv")), NoRows);
  CHECK_THROWS_AS(load_air_quality(fixture("missing_column.csv")), MissingColumns);
  CHECK_THROWS_AS(load_air_quality(fixture("nan_row.csv"), {true}), MalformedRow);

  const Dataset lenient = load_air_quality(fixture("nan_row.csv"));
  CHECK(lenient.size() == 2);
  CHECK(lenient.dropped_malformed == 1);
}

TEST_CASE("synth_stream") {
  ScenarioSpec spec{25.0, 10.0, 10'000, 7};
  const auto a = synth_stream(spec, 5);
  const auto b = synth_stream(spec, 5);
  CHECK(a == b);
  REQUIRE(a.size() == 10'000);

  for (std::size_t j = 0; j < 5; ++j) {
    double mean = 0.0;
    for (const auto& v : a) mean += v[j];
    mean /= 10'000.0;
    double var = 0.0;
    for (const auto& v : a) var += (v[j] - mean) * (v[j] - mean);
    const double sd = std::sqrt(var / 10'000.0);
    CHECK(std::fabs(mean - 25.0) < 0.5);
    CHECK(std::fabs(sd - 10.0) < 0.5);
  }
  for (const auto& v : a) {
    for (double c : v) CHECK(c >= 0.0);
  }

  spec.seed = 8;
  CHECK(synth_stream(spec, 5) != a);

  const auto wide = synth_stream({50.0, 50.0, 10'000, 7}, 5);
  for (std::size_t j = 0; j < 5; ++j) {
    double mean = 0.0;
    for (const auto& v : wide) mean += v[j];
    CHECK(mean / 10'000.0 > 50.0);
  }

  CHECK_THROWS_AS(validate(ScenarioSpec{25.0, 0.0, 10, 1}), ConfigError);
  CHECK_THROWS_AS(validate(ScenarioSpec{25.0, 10.0, 0, 1}), ConfigError);
  CHECK_THROWS_AS(validate(ScenarioSpec{std::nan(""), 10.0, 10, 1}), ConfigError);
}

TEST_CASE("random_split") {
  SUBCASE("single partition gets everything") {
    const auto parts = random_split(17, 1, 3);
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].size() == 17);
  }

  SUBCASE("five partitions cover every row once") {
    const std::size_t rows = 9000;
    const auto parts = random_split(rows, 5, 42);
    CHECK(parts == random_split(rows, 5, 42));
    std::set<std::size_t> seen;
    std::size_t total = 0;
    const double expect = rows / 5.0;
    const double band = 6.0 * std::sqrt(rows * 0.2 * 0.8);
    for (const auto& p : parts) {
      total += p.size();
      seen.insert(p.begin(), p.end());
      CHECK(std::fabs(static_cast<double>(p.size()) - expect) <= band);
    }
    CHECK(total == rows);
    CHECK(seen.size() == rows);
    CHECK(*seen.rbegin() == rows - 1);
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(random_split(3, 0, 1), ConfigError);
    CHECK_THROWS_AS(random_split(3, 4, 1), ConfigError);
  }
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(42, 1) == derive_seed(42, 1));
  CHECK(derive_seed(42, 1) != derive_seed(42, 2));
  CHECK(derive_seed(42, 1) != derive_seed(43, 1));
}
