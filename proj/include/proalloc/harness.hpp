#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "proalloc/dataset.hpp"
#include "proalloc/engine.hpp"

namespace proalloc {

// Seeding of the partitions when no dataset file is given: partition i draws
// `per_partition` vectors from a Gaussian centred at
// mu + spread * sigma * z_i (z_i evenly spaced over [-1, 1]) with standard
// deviation sigma_fraction * sigma, clamped at zero like the stream itself.
struct SyntheticInit {
  std::size_t per_partition = 200;
  double spread = 1.0;
  double sigma_fraction = 0.1;
};

struct RunConfig {
  std::string name = "1";  // scenario label echoed into reports
  EngineConfig engine;
  ScenarioSpec scenario;  // scenario.seed is derived from `seed`
  std::optional<std::filesystem::path> dataset;
  LoadOptions load;
  SyntheticInit init;
  std::uint64_t seed = 42;
};

// The three evaluation scenarios (mu, sigma) with 10,000 vectors each.
RunConfig preset_scenario(int number);

struct MomentStats {
  std::size_t count = 0;
  Vector mean;
  Vector std;
};

// Per-dimension mean and population standard deviation. Throws EmptyCluster
// on an empty set.
std::pair<Vector, Vector> partition_stats(std::span<const Vector> vectors);

struct PartitionReport {
  std::size_t id = 0;       // zero-based
  MomentStats resident;     // initial rows plus allocated vectors
  MomentStats initial;
  MomentStats allocated;    // mean/std empty when nothing was allocated
  MomentStats from_cf;      // moments derived from the root CF
  double threshold = 0.0;
  std::uint64_t synopsis_version = 0;
  std::size_t dominant_clusters = 0;
  bool root_fallback = false;
};

struct RunReport {
  RunConfig config;
  std::vector<std::string> dimension_names;
  std::vector<PartitionReport> per_partition;
  std::size_t majority_partition = 0;  // zero-based; most allocated vectors
  std::uint64_t messages_disseminated = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  double cf_max_relative_error = 0.0;  // CF-derived vs raw moments

  std::uint64_t resident_total() const;
  // Partition indices sorted by allocated count, largest first.
  std::vector<std::size_t> ranked_by_allocation() const;
};

// One execution of the evaluation protocol. Construction loads (or
// synthesizes) the initial partitions and builds the engine; stream() pushes
// the scenario's vectors through it. Raw vectors are kept per partition only
// for exact statistics; the allocation path never reads them.
class Simulation {
 public:
  explicit Simulation(RunConfig config);

  void stream(const AllocationEngine::RecordSink& sink = nullptr);

  RunReport report() const;

  const RunConfig& config() const { return config_; }
  const AllocationEngine& engine() const { return *engine_; }

 private:
  RunConfig config_;
  std::vector<std::string> names_;
  std::vector<std::vector<Vector>> initial_;
  std::vector<std::vector<Vector>> allocated_;
  std::optional<AllocationEngine> engine_;
};

// load or synthesize -> split -> build trees -> stream -> report. The optional
// sink sees every allocation record. Throws on any configuration or data
// error; no partial report is produced.
RunReport run_scenario(const RunConfig& config,
                       const AllocationEngine::RecordSink& sink = nullptr);

// Runs `config`, audits the engine and adds the invariant probes: replay
// determinism, resident-vector conservation, CF/raw moment agreement and
// randomized metric and weight properties.
AuditReport validate_run(const RunConfig& config);

struct SummaryRow {
  std::string scenario;
  double gen_mu = 0.0;
  double gen_sigma = 0.0;
  std::size_t majority_count = 0;
  double mean_min = 0.0;
  double mean_max = 0.0;
  double std_min = 0.0;
  double std_max = 0.0;
};

// One row per report: generation parameters, size of the majority partition
// and the ranges of its per-dimension means and standard deviations.
std::vector<SummaryRow> summary_table(std::span<const RunReport> reports);

std::string summary_csv(std::span<const SummaryRow> rows);
std::string summary_text(std::span<const SummaryRow> rows);

// Stable JSON rendering (two-space indent, trailing newline).
std::string report_json(const RunReport& report);
std::string reports_json(std::span<const RunReport> reports);

}  // namespace proalloc
