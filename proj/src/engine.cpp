#include "proalloc/engine.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "proalloc/errors.hpp"

namespace proalloc {

void validate(const EngineConfig& config) {
  if (config.partitions == 0) throw ConfigError("need at least one partition");
  if (config.dim == 0) throw ConfigError("dimension must be positive");
  if (config.alpha == 0) throw ConfigError("alpha must be positive");
  if (config.branching < 2) throw ConfigError("branching factor must be >= 2");
  if (config.threshold && !(*config.threshold > 0.0 && std::isfinite(*config.threshold))) {
    throw ConfigError("leaf threshold must be a positive real");
  }
  if (!(config.threshold_scale > 0.0) || !std::isfinite(config.threshold_scale)) {
    throw ConfigError("threshold scale must be positive");
  }
  if (config.refresh_interval == 0) throw ConfigError("refresh interval must be positive");
  validate(config.ensemble);
}

double heuristic_threshold(std::span<const Vector> rows, double scale) {
  constexpr double kFloor = 1e-9;
  if (rows.empty()) return kFloor;
  const std::size_t m = rows.front().size();
  const double n = static_cast<double>(rows.size());
  double mean_var = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r[j];
    mean /= n;
    double var = 0.0;
    for (const auto& r : rows) var += (r[j] - mean) * (r[j] - mean);
    mean_var += var / n;
  }
  if (m > 0) mean_var /= static_cast<double>(m);
  const double t = scale * std::sqrt(mean_var);
  return t > kFloor ? t : kFloor;
}

Allocation allocate(std::span<const double> x, std::span<const Synopsis> synopses,
                    const EnsembleParams& params) {
  if (synopses.empty()) throw ConfigError("allocation needs at least one synopsis");
  Allocation out;
  out.scores.reserve(synopses.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < synopses.size(); ++i) {
    if (synopses[i].dim() != x.size()) {
      throw DimensionMismatch("vector of dimension " + std::to_string(x.size()) +
                              " vs synopsis of dimension " +
                              std::to_string(synopses[i].dim()));
    }
    out.scores.push_back(ensemble_similarity(x, synopses[i], params));
    if (out.scores.back().similarity > best) {
      best = out.scores.back().similarity;
      out.chosen = i;
    }
  }
  return out;
}

std::string to_json_line(const AllocationRecord& record) {
  std::string line = "{\"t\":" + std::to_string(record.t) +
                     ",\"chosen\":" + std::to_string(record.chosen + 1) + ",\"similarity\":[";
  char buf[32];
  for (std::size_t i = 0; i < record.scores.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g", record.scores[i].similarity);
    if (i) line += ',';
    line += buf;
  }
  line += "]}";
  return line;
}

AllocationEngine::AllocationEngine(EngineConfig config,
                                   const std::vector<std::vector<Vector>>& initial)
    : config_(std::move(config)) {
  validate(config_);
  if (initial.size() != config_.partitions) {
    throw ConfigError("expected initial data for " + std::to_string(config_.partitions) +
                      " partitions, got " + std::to_string(initial.size()));
  }
  partitions_.reserve(initial.size());
  synopses_.reserve(initial.size());
  for (std::size_t p = 0; p < initial.size(); ++p) {
    const auto& rows = initial[p];
    if (rows.empty()) {
      throw ConfigError("partition " + std::to_string(p + 1) + " has no initial data");
    }
    const double threshold = config_.threshold.value_or(
        heuristic_threshold(rows, config_.threshold_scale));
    PartitionState state{p, CFTree(config_.dim, config_.branching, threshold), 0};
    for (const auto& row : rows) state.tree.insert(row);
    initial_mass_ += rows.size();
    synopses_.push_back(extract_synopsis(state.tree, config_.alpha, p, 0));
    partitions_.push_back(std::move(state));
  }
}

void AllocationEngine::check_vector(std::span<const double> x) const {
  if (x.size() != config_.dim) {
    throw DimensionMismatch("expected a vector of dimension " + std::to_string(config_.dim) +
                            ", got " + std::to_string(x.size()));
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) {
      throw MalformedInput("non-finite component at index " + std::to_string(j));
    }
    if (x[j] < 0.0) throw DomainError("negative component at index " + std::to_string(j));
  }
}

AllocationRecord AllocationEngine::ingest(std::span<const double> x) {
  try {
    check_vector(x);
  } catch (const Error&) {
    ++rejected_;
    throw;
  }

  Allocation a = allocate(x, synopses_, config_.ensemble);
  PartitionState& target = partitions_[a.chosen];
  target.tree.insert(x);
  if (++target.pending >= config_.refresh_interval) {
    const std::uint64_t version = synopses_[a.chosen].version + 1;
    synopses_[a.chosen] = extract_synopsis(target.tree, config_.alpha, a.chosen, version);
    target.pending = 0;
    ++messages_;
  }
  ++accepted_;

  AllocationRecord record{accepted_, Vector(x.begin(), x.end()), a.chosen, std::move(a.scores)};
  if (sink_) sink_(record);
  return record;
}

std::uint64_t AllocationEngine::total_mass() const {
  std::uint64_t mass = 0;
  for (const auto& p : partitions_) mass += p.tree.size();
  return mass;
}

AuditReport AllocationEngine::audit() const {
  AuditReport report;
  for (const auto& p : partitions_) {
    for (auto check : p.tree.audit()) {
      check.name = "partition" + std::to_string(p.id + 1) + "." + check.name;
      report.push_back(std::move(check));
    }
  }

  const std::uint64_t mass = total_mass();
  report.push_back({"engine.mass_conservation", mass == initial_mass_ + accepted_,
                    "resident " + std::to_string(mass) + ", initial " +
                        std::to_string(initial_mass_) + " + accepted " +
                        std::to_string(accepted_)});

  bool alpha_ok = true;
  bool centroid_ok = true;
  bool fresh_ok = true;
  std::string alpha_detail;
  for (std::size_t i = 0; i < synopses_.size(); ++i) {
    const Synopsis& syn = synopses_[i];
    const PartitionState& p = partitions_[i];
    if (syn.partition != p.id || syn.dominant.empty() ||
        syn.dominant.size() != syn.centroids.size()) {
      alpha_ok = false;
      alpha_detail = "malformed synopsis for partition " + std::to_string(i + 1);
      continue;
    }
    if (syn.root_fallback) {
      if (syn.dominant.size() != 1) alpha_ok = false;
    } else {
      for (const auto& cf : syn.dominant) {
        if (cf.count < config_.alpha) {
          alpha_ok = false;
          alpha_detail = "partition " + std::to_string(i + 1) + " publishes a CF below alpha";
        }
      }
    }
    for (std::size_t c = 0; c < syn.dominant.size(); ++c) {
      const Vector expect = cf_centroid(syn.dominant[c]);
      if (expect != syn.centroids[c]) centroid_ok = false;
    }
    if (p.pending >= config_.refresh_interval) fresh_ok = false;
    // With nothing pending the published synopsis must match the tree.
    if (p.pending == 0) {
      const Synopsis now = extract_synopsis(p.tree, config_.alpha, p.id, syn.version);
      if (now.dominant != syn.dominant) fresh_ok = false;
    }
  }
  report.push_back({"synopsis.alpha_compliance", alpha_ok, alpha_detail});
  report.push_back({"synopsis.centroids", centroid_ok, ""});
  report.push_back({"synopsis.refresh_window", fresh_ok, ""});

  // Probe: score the first partition's mean against every synopsis.
  bool weights_ok = true;
  std::string weights_detail;
  try {
    const Vector probe = cf_centroid(partitions_.front().tree.root_cf());
    const Allocation a = allocate(probe, synopses_, config_.ensemble);
    for (const auto& s : a.scores) {
      double sum = 0.0;
      double pooled = 0.0;
      for (std::size_t m = 0; m < s.weights.weights.size(); ++m) {
        const double w = s.weights.weights[m];
        if (w < 0.0 || w > 1.0) weights_ok = false;
        sum += w;
        pooled += w * s.per_metric[m].dissimilarity;
      }
      if (std::abs(sum - 1.0) > 1e-12 || std::abs(pooled - s.pooled_dissimilarity) > 1e-12 ||
          std::abs(s.similarity - (1.0 - s.pooled_dissimilarity)) > 1e-12) {
        weights_ok = false;
      }
    }
  } catch (const Error& e) {
    weights_ok = false;
    weights_detail = e.what();
  }
  report.push_back({"ensemble.weight_convexity", weights_ok, weights_detail});
  return report;
}

}  // namespace proalloc
