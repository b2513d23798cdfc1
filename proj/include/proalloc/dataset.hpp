#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "proalloc/cluster_feature.hpp"

namespace proalloc {

// The five air-quality columns used for allocation, in order.
inline constexpr std::array<std::string_view, 5> kAirQualityColumns{
    "CO_GT", "NMHC_GT", "C6H6_GT", "NOX_GT", "NO2_GT"};

// Value the published file uses for a missing reading.
inline constexpr double kMissingSentinel = -200.0;

struct Dataset {
  std::vector<Vector> rows;
  std::vector<std::string> dimension_names;
  std::string source;
  std::size_t dropped_missing = 0;    // sentinel or negative reading
  std::size_t dropped_malformed = 0;  // unparseable rows (lenient mode only)

  std::size_t dim() const { return dimension_names.size(); }
  std::size_t size() const { return rows.size(); }
};

struct LoadOptions {
  // Reject rows that are short, unparseable or non-finite instead of skipping
  // them.
  bool strict = false;
};

// Reads either the published layout (';' separated, ',' decimal mark,
// "CO(GT)" style headers, trailing empty columns) or a plain CSV whose header
// carries the column names above. Rows with a missing or negative reading in
// a selected column are dropped. Throws FileUnreadable, MissingColumns,
// MalformedRow (strict mode) or NoRows.
Dataset load_air_quality(const std::filesystem::path& path, const LoadOptions& options = {});

// Header cell -> canonical column name: "NOx(GT)" -> "NOX_GT".
std::string canonical_column(std::string_view header);

struct ScenarioSpec {
  double mu = 25.0;
  double sigma = 10.0;
  std::size_t count = 10'000;
  std::uint64_t seed = 0;
};

// Throws ConfigError unless sigma > 0, count > 0 and mu is finite.
void validate(const ScenarioSpec& spec);

// `count` vectors of `dim` independent Normal(mu, sigma) draws clamped at 0.
// A vector that clamps to all-zero is redrawn. Deterministic per seed.
std::vector<Vector> synth_stream(const ScenarioSpec& spec, std::size_t dim);

// Assigns each of `rows` indices to one of `parts` partitions uniformly at
// random. Throws ConfigError when parts == 0 or parts > rows.
std::vector<std::vector<std::size_t>> random_split(std::size_t rows, std::size_t parts,
                                                   std::uint64_t seed);

// Independent child seed for a named sub-stream of a run.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace proalloc
