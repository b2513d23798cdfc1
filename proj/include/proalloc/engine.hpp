#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proalloc/audit.hpp"
#include "proalloc/cf_tree.hpp"
#include "proalloc/similarity.hpp"
#include "proalloc/synopsis.hpp"

namespace proalloc {

struct EngineConfig {
  std::size_t partitions = 5;
  std::size_t dim = 5;
  std::uint64_t alpha = 50;
  std::size_t branching = 8;
  // Fixed leaf threshold; when unset each partition derives its own from its
  // initial data (threshold_scale x RMS per-dimension standard deviation).
  std::optional<double> threshold;
  double threshold_scale = 3.0;
  EnsembleParams ensemble;
  std::uint64_t refresh_interval = 1;  // inserts between synopsis refreshes
};

// Throws ConfigError on the first violated constraint.
void validate(const EngineConfig& config);

// Leaf threshold derived from a partition's initial rows. Never returns a
// non-positive value.
double heuristic_threshold(std::span<const Vector> rows, double scale);

struct Allocation {
  std::size_t chosen = 0;
  std::vector<EnsembleScore> scores;  // one per partition
};

// Argmax of the ensemble similarity over all synopses; lowest index on ties.
// Pure. Throws ConfigError on an empty synopsis list and DimensionMismatch
// when x and a synopsis disagree on M.
Allocation allocate(std::span<const double> x, std::span<const Synopsis> synopses,
                    const EnsembleParams& params);

struct AllocationRecord {
  std::uint64_t t = 0;  // 1-based sequence number of accepted vectors
  Vector vector;
  std::size_t chosen = 0;
  std::vector<EnsembleScore> scores;
};

// One JSON object per line: {"t":..,"chosen":..,"similarity":[..]} with
// 1-based partition ids and similarities printed to 12 significant digits.
std::string to_json_line(const AllocationRecord& record);

struct PartitionState {
  std::size_t id = 0;
  CFTree tree;
  std::uint64_t pending = 0;  // inserts since the last synopsis refresh
};

// In-process simulation of N peers, each owning one partition. Every
// ingested vector is scored against the last published synopses, inserted
// into the winning partition's CF-tree, and that partition republishes its
// synopsis every `refresh_interval` inserts (one counted message each).
class AllocationEngine {
 public:
  using RecordSink = std::function<void(const AllocationRecord&)>;

  // `initial` holds the starting rows of each partition; none may be empty.
  AllocationEngine(EngineConfig config, const std::vector<std::vector<Vector>>& initial);

  // Invalid vectors are counted in rejected() and the error rethrown; the
  // engine state is otherwise untouched.
  AllocationRecord ingest(std::span<const double> x);

  void set_record_sink(RecordSink sink) { sink_ = std::move(sink); }

  const EngineConfig& config() const { return config_; }
  std::size_t partition_count() const { return partitions_.size(); }
  const PartitionState& partition(std::size_t i) const { return partitions_.at(i); }
  const std::vector<Synopsis>& synopses() const { return synopses_; }

  std::uint64_t accepted() const { return accepted_; }
  std::uint64_t rejected() const { return rejected_; }
  std::uint64_t messages_disseminated() const { return messages_; }
  std::uint64_t initial_mass() const { return initial_mass_; }
  std::uint64_t total_mass() const;

  AuditReport audit() const;

  // Fault injection for audit tests.
  PartitionState& partition_for_testing(std::size_t i) { return partitions_.at(i); }

 private:
  void check_vector(std::span<const double> x) const;

  EngineConfig config_;
  std::vector<PartitionState> partitions_;
  std::vector<Synopsis> synopses_;
  std::uint64_t accepted_ = 0;
  std::uint64_t rejected_ = 0;
  std::uint64_t messages_ = 0;
  std::uint64_t initial_mass_ = 0;
  RecordSink sink_;
};

}  // namespace proalloc
