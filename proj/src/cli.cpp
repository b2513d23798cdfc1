#include "proalloc/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>

#include "CLI11.hpp"

#include "proalloc/errors.hpp"
#include "proalloc/harness.hpp"

namespace proalloc::cli {
namespace {

struct Options {
  std::string scenario = "1";
  std::optional<double> mu;
  std::optional<double> sigma;
  std::optional<std::size_t> vectors;
  std::size_t partitions = 5;
  std::string dataset;
  bool strict = false;
  std::uint64_t seed = 42;
  std::uint64_t alpha = 50;
  std::size_t branching = 8;
  std::optional<double> threshold;
  double threshold_scale = 3.0;
  double theta = 0.1;
  double k = 3.0;
  std::uint64_t refresh = 1;
  std::size_t init_per_partition = 200;
  double init_spread = 1.0;
  double init_sigma_fraction = 0.1;
  std::string out;
  std::string format = "json";
  std::string records;
};

void add_run_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--scenario", o.scenario, "1, 2, 3, all or custom")
      ->check(CLI::IsMember({"1", "2", "3", "all", "custom"}))
      ->capture_default_str();
  cmd.add_option("--mu", o.mu, "Generation mean (custom scenario)");
  cmd.add_option("--sigma", o.sigma, "Generation standard deviation (custom scenario)");
  cmd.add_option("--vectors", o.vectors, "Number of streamed vectors [10000]");
  cmd.add_option("--partitions", o.partitions, "Number of partitions N")->capture_default_str();
  cmd.add_option("--dataset", o.dataset, "Air-quality CSV; synthetic-only mode when absent")
      ->envname(kDatasetEnv);
  cmd.add_flag("--strict", o.strict, "Reject malformed dataset rows instead of skipping them");
  cmd.add_option("--seed", o.seed, "Master seed")->capture_default_str();
  cmd.add_option("--alpha", o.alpha, "Minimum micro-cluster size in a synopsis")
      ->capture_default_str();
  cmd.add_option("--branching", o.branching, "CF-tree branching factor")->capture_default_str();
  cmd.add_option("--threshold", o.threshold, "Fixed leaf radius threshold [per-partition heuristic]");
  cmd.add_option("--threshold-scale", o.threshold_scale, "Scale of the threshold heuristic")
      ->capture_default_str();
  cmd.add_option("--theta", o.theta, "Weight of an outlying metric")->capture_default_str();
  cmd.add_option("--k", o.k, "Outlier cut-off in standard deviations")->capture_default_str();
  cmd.add_option("--refresh", o.refresh, "Inserts between synopsis refreshes")
      ->capture_default_str();
  cmd.add_option("--init-per-partition", o.init_per_partition,
                 "Synthetic-only mode: initial vectors per partition")
      ->capture_default_str();
  cmd.add_option("--init-spread", o.init_spread,
                 "Synthetic-only mode: spread of partition centres in sigma units")
      ->capture_default_str();
  cmd.add_option("--init-sigma-fraction", o.init_sigma_fraction,
                 "Synthetic-only mode: initial std as a fraction of sigma")
      ->capture_default_str();
}

std::vector<RunConfig> build_configs(const Options& o, std::size_t default_vectors) {
  std::vector<RunConfig> configs;
  if (o.scenario == "all") {
    for (int s = 1; s <= 3; ++s) configs.push_back(preset_scenario(s));
  } else if (o.scenario == "custom") {
    if (!o.mu || !o.sigma || !o.vectors) {
      throw ConfigError("custom scenario needs --mu, --sigma and --vectors");
    }
    RunConfig cfg;
    cfg.name = "custom";
    cfg.scenario.mu = *o.mu;
    cfg.scenario.sigma = *o.sigma;
    configs.push_back(cfg);
  } else {
    configs.push_back(preset_scenario(std::stoi(o.scenario)));
  }

  for (auto& cfg : configs) {
    if (o.scenario != "custom" && (o.mu || o.sigma)) {
      throw ConfigError("--mu/--sigma only apply to --scenario custom");
    }
    cfg.scenario.count = o.vectors.value_or(default_vectors);
    cfg.engine.partitions = o.partitions;
    cfg.engine.alpha = o.alpha;
    cfg.engine.branching = o.branching;
    cfg.engine.threshold = o.threshold;
    cfg.engine.threshold_scale = o.threshold_scale;
    cfg.engine.ensemble = {o.theta, o.k};
    cfg.engine.refresh_interval = o.refresh;
    if (!o.dataset.empty()) cfg.dataset = o.dataset;
    cfg.load.strict = o.strict;
    cfg.init = {o.init_per_partition, o.init_spread, o.init_sigma_fraction};
    cfg.seed = o.seed;
    validate(cfg.engine);
  }
  return configs;
}

int do_run(const Options& o, std::ostream& out) {
  if (o.format != "json" && o.format != "csv") throw ConfigError("--format must be json or csv");
  const auto configs = build_configs(o, 10'000);
  if (!o.records.empty() && configs.size() != 1) {
    throw ConfigError("--records needs a single scenario");
  }

  std::vector<RunReport> reports;
  if (configs.size() == 1) {
    std::string lines;
    AllocationEngine::RecordSink sink;
    if (!o.records.empty()) {
      sink = [&lines](const AllocationRecord& r) {
        lines += to_json_line(r);
        lines += '\n';
      };
    }
    reports.push_back(run_scenario(configs.front(), sink));
    if (!o.records.empty()) write_atomically(o.records, lines);
  } else {
    // Scenarios are independent; run them side by side.
    std::vector<std::future<RunReport>> jobs;
    for (const auto& cfg : configs) {
      jobs.push_back(std::async(std::launch::async, [cfg] { return run_scenario(cfg); }));
    }
    for (auto& job : jobs) reports.push_back(job.get());
  }

  const auto rows = summary_table(reports);
  if (!o.out.empty()) {
    std::string body;
    if (o.format == "csv") {
      body = summary_csv(rows);
    } else {
      body = reports.size() == 1 ? report_json(reports.front()) : reports_json(reports);
    }
    write_atomically(o.out, body);
  }
  if (o.format == "csv" && o.out.empty()) {
    out << summary_csv(rows);
  } else {
    out << summary_text(rows);
  }
  return kOk;
}

int do_validate(const Options& o, std::ostream& out) {
  const auto configs = build_configs(o, 10'000);
  bool ok = true;
  for (const auto& cfg : configs) {
    const AuditReport checks = validate_run(cfg);
    for (const auto& c : checks) {
      out << (c.passed ? "PASS " : "FAIL ") << "scenario " << cfg.name << ' ' << c.name;
      if (!c.passed && !c.detail.empty()) out << " (" << c.detail << ')';
      out << '\n';
    }
    ok = ok && all_passed(checks);
  }
  out << (ok ? "all checks passed\n" : "invariant check failed\n");
  return ok ? kOk : kInvariantFailure;
}

int do_stats(const std::string& path, bool strict, std::ostream& out) {
  if (path.empty()) {
    throw ConfigError(std::string("no dataset given (use --dataset or ") + kDatasetEnv + ")");
  }
  const Dataset ds = load_air_quality(path, {strict});
  const auto [mean, sd] = partition_stats(ds.rows);
  out << "source: " << ds.source << '\n';
  out << "rows: " << ds.size() << " (dropped " << ds.dropped_missing << " with missing values, "
      << ds.dropped_malformed << " malformed)\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %14s %14s %14s %14s\n", "dimension", "mean", "std", "min",
                "max");
  out << buf;
  for (std::size_t j = 0; j < ds.dim(); ++j) {
    double lo = ds.rows.front()[j];
    double hi = lo;
    for (const auto& r : ds.rows) {
      lo = std::min(lo, r[j]);
      hi = std::max(hi, r[j]);
    }
    std::snprintf(buf, sizeof buf, "%-10s %14.6f %14.6f %14.6f %14.6f\n",
                  ds.dimension_names[j].c_str(), mean[j], sd[j], lo, hi);
    out << buf;
  }
  return kOk;
}

}  // namespace

void write_atomically(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw FileUnreadable("cannot write " + tmp.string());
    f << contents;
    f.flush();
    if (!f) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw FileUnreadable("failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, target);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Proactive allocation of data vectors to distributed partitions"};
  app.require_subcommand(0, 1);

  Options run_opts;
  auto* run = app.add_subcommand("run", "Run one or all evaluation scenarios");
  add_run_options(*run, run_opts);
  run->add_option("--out", run_opts.out, "Report file (written atomically)");
  run->add_option("--format", run_opts.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  run->add_option("--records", run_opts.records, "Write allocation records as JSON lines");

  Options validate_opts;
  auto* val = app.add_subcommand("validate", "Audit invariants after a randomized run");
  add_run_options(*val, validate_opts);

  std::string stats_path;
  bool stats_strict = false;
  auto* stats = app.add_subcommand("stats", "Summarize a cleaned dataset");
  stats->add_option("--dataset", stats_path, "Air-quality CSV")->envname(kDatasetEnv);
  stats->add_flag("--strict", stats_strict, "Reject malformed rows");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*val) return do_validate(validate_opts, out);
    if (*stats) return do_stats(stats_path, stats_strict, out);
    return do_run(run_opts, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace proalloc::cli
