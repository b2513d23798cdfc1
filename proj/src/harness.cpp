#include "proalloc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

#include "proalloc/errors.hpp"

namespace proalloc {
namespace {

using nlohmann::ordered_json;

// Sub-stream tags for derive_seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kVectorStream = 2;
constexpr std::uint64_t kInitStream = 100;

MomentStats moments(std::span<const Vector> vectors) {
  MomentStats m;
  m.count = vectors.size();
  if (!vectors.empty()) std::tie(m.mean, m.std) = partition_stats(vectors);
  return m;
}

double relative_error(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-12);
  return std::abs(got - want) / scale;
}

std::vector<std::vector<Vector>> synthetic_partitions(const RunConfig& cfg) {
  const auto& init = cfg.init;
  const std::size_t n = cfg.engine.partitions;
  std::vector<std::vector<Vector>> out;
  out.reserve(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double z = n == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(p) / static_cast<double>(n - 1);
    ScenarioSpec spec;
    spec.mu = cfg.scenario.mu + init.spread * cfg.scenario.sigma * z;
    spec.sigma = init.sigma_fraction * cfg.scenario.sigma;
    spec.count = init.per_partition;
    spec.seed = derive_seed(cfg.seed, kInitStream + p);
    out.push_back(synth_stream(spec, cfg.engine.dim));
  }
  return out;
}

ordered_json stats_json(const MomentStats& m) {
  ordered_json j;
  j["count"] = m.count;
  j["mean"] = m.mean;
  j["std"] = m.std;
  return j;
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["scenario"] = {{"name", c.name},
                   {"mu", c.scenario.mu},
                   {"sigma", c.scenario.sigma},
                   {"count", c.scenario.count}};
  j["partitions"] = c.engine.partitions;
  j["dimension"] = c.engine.dim;
  j["alpha"] = c.engine.alpha;
  j["branching"] = c.engine.branching;
  if (c.engine.threshold) {
    j["threshold"] = *c.engine.threshold;
  } else {
    j["threshold"] = "heuristic";
  }
  j["threshold_scale"] = c.engine.threshold_scale;
  j["theta"] = c.engine.ensemble.theta;
  j["k"] = c.engine.ensemble.k;
  j["refresh_interval"] = c.engine.refresh_interval;
  if (c.dataset) {
    j["dataset"] = c.dataset->string();
    j["strict"] = c.load.strict;
  } else {
    j["dataset"] = nullptr;
    j["init"] = {{"per_partition", c.init.per_partition},
                 {"spread", c.init.spread},
                 {"sigma_fraction", c.init.sigma_fraction}};
  }
  return j;
}

ordered_json to_json(const RunReport& r) {
  ordered_json j;
  j["config"] = config_json(r.config);
  j["seed"] = r.config.seed;
  j["dimension_names"] = r.dimension_names;
  ordered_json parts = ordered_json::array();
  for (const auto& p : r.per_partition) {
    ordered_json pj;
    pj["partition_id"] = p.id + 1;
    pj["count"] = p.resident.count;
    pj["mean"] = p.resident.mean;
    pj["std"] = p.resident.std;
    pj["initial"] = stats_json(p.initial);
    pj["allocated"] = stats_json(p.allocated);
    pj["cf_moments"] = {{"mean", p.from_cf.mean}, {"std", p.from_cf.std}};
    pj["leaf_threshold"] = p.threshold;
    pj["synopsis_version"] = p.synopsis_version;
    pj["dominant_clusters"] = p.dominant_clusters;
    pj["root_fallback"] = p.root_fallback;
    parts.push_back(std::move(pj));
  }
  j["per_partition"] = std::move(parts);
  j["majority_partition"] = r.majority_partition + 1;
  j["messages_disseminated"] = r.messages_disseminated;
  j["accepted"] = r.accepted;
  j["rejected"] = r.rejected;
  j["cf_max_relative_error"] = r.cf_max_relative_error;
  return j;
}

}  // namespace

RunConfig preset_scenario(int number) {
  RunConfig cfg;
  cfg.name = std::to_string(number);
  switch (number) {
    case 1:
      cfg.scenario.mu = 25.0;
      cfg.scenario.sigma = 10.0;
      break;
    case 2:
      cfg.scenario.mu = 25.0;
      cfg.scenario.sigma = 20.0;
      break;
    case 3:
      cfg.scenario.mu = 50.0;
      cfg.scenario.sigma = 50.0;
      break;
    default:
      throw ConfigError("unknown scenario " + std::to_string(number) + " (expected 1, 2 or 3)");
  }
  cfg.scenario.count = 10'000;
  return cfg;
}

std::pair<Vector, Vector> partition_stats(std::span<const Vector> vectors) {
  if (vectors.empty()) throw EmptyCluster("statistics of an empty vector set");
  const std::size_t m = vectors.front().size();
  const double n = static_cast<double>(vectors.size());
  Vector mean(m, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != m) throw DimensionMismatch("vectors of differing dimension");
    for (std::size_t j = 0; j < m; ++j) mean[j] += v[j];
  }
  for (auto& x : mean) x /= n;
  Vector sd(m, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t j = 0; j < m; ++j) sd[j] += (v[j] - mean[j]) * (v[j] - mean[j]);
  }
  for (auto& x : sd) x = std::sqrt(x / n);
  return {std::move(mean), std::move(sd)};
}

std::uint64_t RunReport::resident_total() const {
  std::uint64_t total = 0;
  for (const auto& p : per_partition) total += p.resident.count;
  return total;
}

std::vector<std::size_t> RunReport::ranked_by_allocation() const {
  std::vector<std::size_t> order(per_partition.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return per_partition[a].allocated.count > per_partition[b].allocated.count;
  });
  return order;
}

Simulation::Simulation(RunConfig config) : config_(std::move(config)) {
  RunConfig& cfg = config_;
  validate(cfg.engine);
  if (!std::isfinite(cfg.scenario.mu) || !(cfg.scenario.sigma > 0.0)) {
    throw ConfigError("scenario needs a finite mean and a positive sigma");
  }
  cfg.scenario.seed = derive_seed(cfg.seed, kVectorStream);

  if (cfg.dataset) {
    Dataset ds = load_air_quality(*cfg.dataset, cfg.load);
    cfg.engine.dim = ds.dim();
    names_ = ds.dimension_names;
    const auto split = random_split(ds.size(), cfg.engine.partitions,
                                    derive_seed(cfg.seed, kSplitStream));
    initial_.resize(split.size());
    for (std::size_t p = 0; p < split.size(); ++p) {
      if (split[p].empty()) {
        throw DataError("random split left partition " + std::to_string(p + 1) + " empty");
      }
      for (std::size_t row : split[p]) initial_[p].push_back(ds.rows[row]);
    }
  } else {
    if (cfg.init.per_partition == 0) throw ConfigError("init_per_partition must be positive");
    if (!(cfg.init.sigma_fraction > 0.0) || !std::isfinite(cfg.init.spread)) {
      throw ConfigError("synthetic init needs a positive sigma fraction and a finite spread");
    }
    initial_ = synthetic_partitions(cfg);
    if (cfg.engine.dim == kAirQualityColumns.size()) {
      names_.assign(kAirQualityColumns.begin(), kAirQualityColumns.end());
    } else {
      for (std::size_t j = 0; j < cfg.engine.dim; ++j) names_.push_back("dim" + std::to_string(j + 1));
    }
  }

  engine_.emplace(cfg.engine, initial_);
  allocated_.resize(cfg.engine.partitions);
}

void Simulation::stream(const AllocationEngine::RecordSink& sink) {
  if (config_.scenario.count == 0) return;
  engine_->set_record_sink(sink);
  for (const auto& x : synth_stream(config_.scenario, config_.engine.dim)) {
    try {
      const AllocationRecord rec = engine_->ingest(x);
      allocated_[rec.chosen].push_back(x);
    } catch (const MalformedInput&) {
    } catch (const DomainError&) {
    }
  }
  engine_->set_record_sink(nullptr);
}

RunReport Simulation::report() const {
  RunReport report;
  report.config = config_;
  report.dimension_names = names_;
  report.messages_disseminated = engine_->messages_disseminated();
  report.accepted = engine_->accepted();
  report.rejected = engine_->rejected();
  const std::size_t dim = config_.engine.dim;
  for (std::size_t p = 0; p < config_.engine.partitions; ++p) {
    PartitionReport pr;
    pr.id = p;
    std::vector<Vector> resident = initial_[p];
    resident.insert(resident.end(), allocated_[p].begin(), allocated_[p].end());
    pr.resident = moments(resident);
    pr.initial = moments(initial_[p]);
    pr.allocated = moments(allocated_[p]);

    const PartitionState& state = engine_->partition(p);
    const ClusterFeature root = state.tree.root_cf();
    pr.from_cf.count = root.count;
    pr.from_cf.mean = cf_centroid(root);
    pr.from_cf.std = cf_variance(root);
    for (auto& v : pr.from_cf.std) v = std::sqrt(v);
    for (std::size_t j = 0; j < dim; ++j) {
      report.cf_max_relative_error =
          std::max({report.cf_max_relative_error,
                    relative_error(pr.from_cf.mean[j], pr.resident.mean[j]),
                    relative_error(pr.from_cf.std[j], pr.resident.std[j])});
    }
    pr.threshold = state.tree.threshold();
    const Synopsis& syn = engine_->synopses()[p];
    pr.synopsis_version = syn.version;
    pr.dominant_clusters = syn.dominant.size();
    pr.root_fallback = syn.root_fallback;
    report.per_partition.push_back(std::move(pr));
  }
  report.majority_partition = report.ranked_by_allocation().front();
  return report;
}

RunReport run_scenario(const RunConfig& config, const AllocationEngine::RecordSink& sink) {
  Simulation sim(config);
  sim.stream(sink);
  return sim.report();
}

AuditReport validate_run(const RunConfig& config) {
  Simulation sim(config);
  sim.stream();
  AuditReport checks = sim.engine().audit();
  const RunReport report = sim.report();

  std::uint64_t initial_rows = sim.engine().initial_mass();
  checks.push_back({"harness.resident_conservation",
                    report.resident_total() == initial_rows + report.accepted,
                    std::to_string(report.resident_total()) + " resident"});
  checks.push_back({"harness.cf_moment_agreement", report.cf_max_relative_error <= 1e-6,
                    "max relative error " + std::to_string(report.cf_max_relative_error)});
  bool std_ok = true;
  for (const auto& p : report.per_partition) {
    for (double s : p.resident.std) std_ok = std_ok && s >= 0.0;
  }
  checks.push_back({"harness.nonnegative_std", std_ok, ""});

  const RunReport replay = run_scenario(config);
  checks.push_back({"harness.replay_determinism", report_json(replay) == report_json(report), ""});

  // Randomized metric and weight properties.
  std::mt19937_64 rng(derive_seed(config.seed, 7));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> mag(0.0, 100.0);
  bool tie_ok = true;
  bool bounds_ok = true;
  bool symmetric_ok = true;
  bool uniform_ok = true;
  const std::size_t dim = config.dataset ? report.dimension_names.size() : config.engine.dim;
  for (int trial = 0; trial < 1000; ++trial) {
    Vector x(dim);
    Vector s(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      x[j] = mag(rng);
      s[j] = mag(rng);
    }
    const double o1 = jaccard_dissim(x, s);
    const double o2 = sorensen_dissim(x, s);
    const double o3 = kulczynski_dissim(x, s);
    tie_ok = tie_ok && std::abs(o1 - 2.0 * o2 / (1.0 + o2)) <= 1e-12;
    for (double o : {o1, o2, o3}) bounds_ok = bounds_ok && o >= 0.0 && o <= 1.0;
    symmetric_ok = symmetric_ok && std::abs(o1 - jaccard_dissim(s, x)) <= 1e-12 &&
                   std::abs(o2 - sorensen_dissim(s, x)) <= 1e-12 &&
                   std::abs(o3 - kulczynski_dissim(s, x)) <= 1e-12;
    const double triple[3] = {unit(rng), unit(rng), unit(rng)};
    const WeightVector w = compute_weights(triple, config.engine.ensemble.theta, 3.0);
    for (double wi : w.weights) uniform_ok = uniform_ok && wi == 1.0 / 3.0;
  }
  checks.push_back({"metrics.algebraic_tie", tie_ok, ""});
  checks.push_back({"metrics.unit_bounds", bounds_ok, ""});
  checks.push_back({"metrics.symmetry", symmetric_ok, ""});
  checks.push_back({"weights.three_metric_uniform", uniform_ok, ""});
  return checks;
}

std::vector<SummaryRow> summary_table(std::span<const RunReport> reports) {
  std::vector<SummaryRow> rows;
  for (const auto& r : reports) {
    const PartitionReport& major = r.per_partition.at(r.majority_partition);
    SummaryRow row;
    row.scenario = r.config.name;
    row.gen_mu = r.config.scenario.mu;
    row.gen_sigma = r.config.scenario.sigma;
    row.majority_count = major.allocated.count;
    const auto [mean_lo, mean_hi] = std::minmax_element(major.resident.mean.begin(),
                                                        major.resident.mean.end());
    const auto [std_lo, std_hi] = std::minmax_element(major.resident.std.begin(),
                                                      major.resident.std.end());
    row.mean_min = *mean_lo;
    row.mean_max = *mean_hi;
    row.std_min = *std_lo;
    row.std_max = *std_hi;
    rows.push_back(row);
  }
  return rows;
}

std::string summary_csv(std::span<const SummaryRow> rows) {
  std::ostringstream out;
  out << "scenario,gen_mu,gen_sigma,majority_count,mean_min,mean_max,std_min,std_max\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%zu,%.6f,%.6f,%.6f,%.6f\n",
                  r.scenario.c_str(), r.gen_mu, r.gen_sigma, r.majority_count, r.mean_min,
                  r.mean_max, r.std_min, r.std_max);
    out << buf;
  }
  return out.str();
}

std::string summary_text(std::span<const SummaryRow> rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-9s %7s %7s %9s %-19s %-19s\n", "scenario", "mu", "sigma",
                "majority", "mean interval", "std interval");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-9s %7.2f %7.2f %9zu %8.2f - %-8.2f %8.2f - %-8.2f\n",
                  r.scenario.c_str(), r.gen_mu, r.gen_sigma, r.majority_count, r.mean_min,
                  r.mean_max, r.std_min, r.std_max);
    out << buf;
  }
  return out.str();
}

std::string report_json(const RunReport& report) { return to_json(report).dump(2) + "\n"; }

std::string reports_json(std::span<const RunReport> reports) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr.dump(2) + "\n";
}

}  // namespace proalloc
