#include "proalloc/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>

#include "proalloc/errors.hpp"

namespace proalloc {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<double> parse_number(std::string_view field, bool decimal_comma) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  std::string buf(field);
  if (decimal_comma) std::replace(buf.begin(), buf.end(), ',', '.');
  double value = 0.0;
  const char* first = buf.data();
  const char* last = buf.data() + buf.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

bool blank(const std::vector<std::string_view>& fields) {
  return std::all_of(fields.begin(), fields.end(),
                     [](std::string_view f) { return trim(f).empty(); });
}

}  // namespace

std::string canonical_column(std::string_view header) {
  std::string out;
  for (char c : trim(header)) {
    if (c == '(' || c == ' ' || c == '.') {
      out += '_';
    } else if (c != ')') {
      out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

Dataset load_air_quality(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw FileUnreadable("cannot open dataset file " + path.string());

  std::string header;
  if (!std::getline(in, header)) throw FileUnreadable("dataset file is empty: " + path.string());
  if (!header.empty() && header.back() == '\r') header.pop_back();
  // Published layout: ';' separated with a ',' decimal mark.
  const bool published = header.find(';') != std::string::npos;
  const char delim = published ? ';' : ',';

  const auto names = split(header, delim);
  std::array<std::size_t, kAirQualityColumns.size()> column{};
  std::string missing;
  for (std::size_t c = 0; c < kAirQualityColumns.size(); ++c) {
    const auto it = std::find_if(names.begin(), names.end(), [&](std::string_view n) {
      return canonical_column(n) == kAirQualityColumns[c];
    });
    if (it == names.end()) {
      if (!missing.empty()) missing += ", ";
      missing += kAirQualityColumns[c];
    } else {
      column[c] = static_cast<std::size_t>(it - names.begin());
    }
  }
  if (!missing.empty()) {
    throw MissingColumns("dataset " + path.string() + " lacks column(s): " + missing);
  }

  Dataset ds;
  ds.source = path.string();
  ds.dimension_names.assign(kAirQualityColumns.begin(), kAirQualityColumns.end());

  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split(line, delim);
    if (blank(fields)) continue;

    Vector row(kAirQualityColumns.size());
    bool malformed = false;
    bool missing_value = false;
    for (std::size_t c = 0; c < column.size(); ++c) {
      if (column[c] >= fields.size()) {
        malformed = true;
        break;
      }
      const auto v = parse_number(fields[column[c]], published);
      if (!v) {
        malformed = true;
        break;
      }
      if (*v == kMissingSentinel || *v < 0.0) missing_value = true;
      row[c] = *v;
    }
    if (malformed) {
      if (options.strict) {
        throw MalformedRow("malformed row at line " + std::to_string(line_no) + " of " +
                           path.string());
      }
      ++ds.dropped_malformed;
      continue;
    }
    if (missing_value) {
      ++ds.dropped_missing;
      continue;
    }
    ds.rows.push_back(std::move(row));
  }

  if (ds.rows.empty()) {
    throw NoRows("no usable rows in " + path.string() + " after cleaning (" +
                 std::to_string(ds.dropped_missing) + " with missing values, " +
                 std::to_string(ds.dropped_malformed) + " malformed)");
  }
  return ds;
}

void validate(const ScenarioSpec& spec) {
  if (!std::isfinite(spec.mu)) throw ConfigError("scenario mean must be finite");
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) {
    throw ConfigError("scenario sigma must be positive");
  }
  if (spec.count == 0) throw ConfigError("scenario vector count must be positive");
}

std::vector<Vector> synth_stream(const ScenarioSpec& spec, std::size_t dim) {
  validate(spec);
  if (dim == 0) throw ConfigError("dimension must be positive");
  constexpr std::size_t kMaxRedraws = 1'000'000;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(spec.mu, spec.sigma);
  std::vector<Vector> out;
  out.reserve(spec.count);
  std::size_t redraws = 0;
  while (out.size() < spec.count) {
    Vector v(dim);
    bool any_positive = false;
    for (auto& c : v) {
      c = std::max(0.0, normal(rng));
      any_positive = any_positive || c > 0.0;
    }
    if (!any_positive) {
      if (++redraws > kMaxRedraws) {
        throw ConfigError("scenario keeps producing all-zero vectors; mean too low");
      }
      continue;
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::vector<std::size_t>> random_split(std::size_t rows, std::size_t parts,
                                                   std::uint64_t seed) {
  if (parts == 0) throw ConfigError("cannot split into zero partitions");
  if (parts > rows) {
    throw ConfigError("cannot split " + std::to_string(rows) + " rows into " +
                      std::to_string(parts) + " partitions");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, parts - 1);
  std::vector<std::vector<std::size_t>> out(parts);
  for (std::size_t i = 0; i < rows; ++i) out[pick(rng)].push_back(i);
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace proalloc
