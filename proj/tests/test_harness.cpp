#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "proalloc/errors.hpp"
#include "proalloc/harness.hpp"

using namespace proalloc;

namespace {

std::filesystem::path fixture(const char* name) {
  return std::filesystem::path(PROALLOC_FIXTURES) / name;
}

RunConfig quick(int scenario, std::size_t vectors) {
  RunConfig cfg = preset_scenario(scenario);
  cfg.scenario.count = vectors;
  return cfg;
}

}  // namespace

TEST_CASE("partition_stats") {
  const std::vector<Vector> pair{{1.0, 3.0}, {3.0, 1.0}};
  const auto [mean, sd] = partition_stats(pair);
  CHECK(mean == Vector{2.0, 2.0});
  CHECK(sd == Vector{1.0, 1.0});

  const std::vector<Vector> one{{4.0, 5.0, 6.0}};
  CHECK(partition_stats(one).second == Vector{0.0, 0.0, 0.0});

  const std::vector<Vector> triple(3, Vector{7.5, 0.5});
  const auto [m3, s3] = partition_stats(triple);
  CHECK(m3 == Vector{7.5, 0.5});
  CHECK(s3 == Vector{0.0, 0.0});

  CHECK_THROWS_AS(partition_stats(std::vector<Vector>{}), EmptyCluster);
}

TEST_CASE("scenario presets") {
  CHECK(preset_scenario(1).scenario.mu == 25.0);
  CHECK(preset_scenario(1).scenario.sigma == 10.0);
  CHECK(preset_scenario(2).scenario.sigma == 20.0);
  CHECK(preset_scenario(3).scenario.mu == 50.0);
  CHECK(preset_scenario(3).scenario.sigma == 50.0);
  CHECK(preset_scenario(2).scenario.count == 10'000);
  CHECK_THROWS_AS(preset_scenario(4), ConfigError);
}

TEST_CASE("an empty stream reports the initial split") {
  Simulation sim(quick(1, 0));
  sim.stream();
  const RunReport r = sim.report();
  CHECK(r.accepted == 0);
  CHECK(r.messages_disseminated == 0);
  for (const auto& p : r.per_partition) {
    CHECK(p.allocated.count == 0);
    CHECK(p.resident.count == p.initial.count);
    CHECK(p.resident.mean == p.initial.mean);
    CHECK(p.resident.std == p.initial.std);
  }
}

TEST_CASE("run bookkeeping") {
  const RunReport r = run_scenario(quick(2, 2000));
  CHECK(r.per_partition.size() == 5);
  CHECK(r.accepted == 2000);
  CHECK(r.rejected == 0);
  CHECK(r.messages_disseminated == 2000);
  CHECK(r.resident_total() == 5 * 200 + 2000);
  CHECK(r.cf_max_relative_error <= 1e-6);

  std::size_t allocated = 0;
  for (const auto& p : r.per_partition) {
    allocated += p.allocated.count;
    CHECK(p.from_cf.count == p.resident.count);
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(oracle::rel_close(p.from_cf.mean[j], p.resident.mean[j], 1e-6));
      CHECK(oracle::rel_close(p.from_cf.std[j], p.resident.std[j], 1e-6));
      CHECK(p.resident.std[j] >= 0.0);
    }
  }
  CHECK(allocated == 2000);

  const auto ranked = r.ranked_by_allocation();
  CHECK(ranked.front() == r.majority_partition);
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    CHECK(r.per_partition[ranked[i - 1]].allocated.count >=
          r.per_partition[ranked[i]].allocated.count);
  }
}

TEST_CASE("dataset-backed run") {
  RunConfig cfg = quick(1, 200);
  cfg.dataset = fixture("published_sample.csv");
  cfg.engine.partitions = 1;
  cfg.engine.alpha = 1;
  const RunReport r = run_scenario(cfg);
  CHECK(r.dimension_names.size() == 5);
  CHECK(r.resident_total() == 3 + 200);
  CHECK(r.per_partition[0].initial.count == 3);

  cfg.engine.partitions = 4;
  CHECK_THROWS_AS(run_scenario(cfg), ConfigError);

  cfg.engine.partitions = 1;
  cfg.dataset = fixture("all_missing.csv");
  CHECK_THROWS_AS(run_scenario(cfg), NoRows);
}

TEST_CASE("reports are deterministic and seed-sensitive") {
  const auto a = report_json(run_scenario(quick(1, 1000)));
  const auto b = report_json(run_scenario(quick(1, 1000)));
  CHECK(a == b);
  RunConfig other = quick(1, 1000);
  other.seed = 43;
  CHECK(report_json(run_scenario(other)) != a);
}

TEST_CASE("report JSON schema") {
  const auto j = nlohmann::json::parse(report_json(run_scenario(quick(3, 500))));
  for (const char* key : {"config", "seed", "dimension_names", "per_partition",
                          "majority_partition", "messages_disseminated", "accepted", "rejected",
                          "cf_max_relative_error"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  REQUIRE(j["per_partition"].size() == 5);
  for (const auto& p : j["per_partition"]) {
    for (const char* key : {"partition_id", "count", "mean", "std", "initial", "allocated",
                            "cf_moments", "leaf_threshold", "synopsis_version",
                            "dominant_clusters", "root_fallback"}) {
      CHECK_MESSAGE(p.contains(key), key);
    }
    CHECK(p["mean"].size() == 5);
  }
  CHECK(j["majority_partition"].get<int>() >= 1);
  CHECK(j["majority_partition"].get<int>() <= 5);
}

TEST_CASE("summary table") {
  std::vector<RunReport> reports{run_scenario(quick(1, 500))};
  auto rows = summary_table(reports);
  REQUIRE(rows.size() == 1);
  const auto& r = reports.front();
  const auto& major = r.per_partition[r.majority_partition];
  CHECK(rows[0].scenario == "1");
  CHECK(rows[0].gen_mu == 25.0);
  CHECK(rows[0].gen_sigma == 10.0);
  CHECK(rows[0].majority_count == major.allocated.count);
  CHECK(rows[0].std_min == *std::min_element(major.resident.std.begin(), major.resident.std.end()));
  CHECK(rows[0].std_max == *std::max_element(major.resident.std.begin(), major.resident.std.end()));
  CHECK(rows[0].mean_min <= rows[0].mean_max);

  const std::string csv = summary_csv(rows);
  CHECK(csv.rfind("scenario,gen_mu,gen_sigma,majority_count,mean_min,mean_max,std_min,std_max\n", 0) ==
        0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("validate_run passes on a short default run") {
  const auto checks = validate_run(quick(1, 2000));
  for (const auto& c : checks) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.passed);
  }
}
