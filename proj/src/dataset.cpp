#include "lshir/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "byte_io.hpp"
#include "lshir/error.hpp"
#include "lshir/random.hpp"

namespace lshir {

namespace {

constexpr std::string_view kFvecMagic = "LSHF";
constexpr std::uint16_t kFvecVersion = 1;

}  // namespace

Dataset::Dataset(std::uint32_t dim, std::vector<std::string> labels,
                 std::vector<FeatureVector> vectors, std::vector<Source> sources)
    : dim_(dim), labels_(std::move(labels)), vectors_(std::move(vectors)),
      sources_(std::move(sources)) {
  if (dim_ == 0) throw std::invalid_argument("dataset dimension must be positive");
  if (!sources_.empty() && sources_.size() != vectors_.size()) {
    throw std::invalid_argument("source flags must cover every vector");
  }
  {
    std::vector<std::string_view> sorted(labels_.begin(), labels_.end());
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end()) throw std::invalid_argument("duplicate label '" + std::string(*dup) + "'");
  }
  rows_.reserve(vectors_.size());
  for (std::size_t row = 0; row < vectors_.size(); ++row) {
    const FeatureVector& v = vectors_[row];
    const std::string where = "vector " + std::to_string(row) + " (id " + std::to_string(v.id) + ")";
    if (v.values.size() != dim_) {
      throw std::invalid_argument(where + ": has " + std::to_string(v.values.size()) +
                                  " values, expected " + std::to_string(dim_));
    }
    if (v.label_id >= labels_.size()) throw std::invalid_argument(where + ": label id out of range");
    for (float x : v.values) {
      if (!std::isfinite(x)) throw std::invalid_argument(where + ": non-finite value");
    }
    if (!rows_.emplace(v.id, row).second) throw std::invalid_argument(where + ": duplicate id");
  }
}

std::optional<std::size_t> Dataset::row_of(std::uint64_t id) const {
  auto it = rows_.find(id);
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

const FeatureVector& Dataset::by_id(std::uint64_t id) const {
  auto it = rows_.find(id);
  if (it == rows_.end()) throw std::out_of_range("no vector with id " + std::to_string(id));
  return vectors_[it->second];
}

std::optional<std::uint32_t> Dataset::label_id(const std::string& name) const {
  auto it = std::find(labels_.begin(), labels_.end(), name);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - labels_.begin());
}

Dataset Dataset::filter_by_source(Source which) const {
  if (!has_sources()) throw std::invalid_argument("dataset carries no source flags");
  std::vector<FeatureVector> kept;
  for (std::size_t row = 0; row < vectors_.size(); ++row) {
    if (sources_[row] == which) kept.push_back(vectors_[row]);
  }
  return Dataset(dim_, labels_, std::move(kept));
}

bool Dataset::operator==(const Dataset& other) const {
  return dim_ == other.dim_ && labels_ == other.labels_ && vectors_ == other.vectors_ &&
         sources_ == other.sources_;
}

// ---------------------------------------------------------------------------
// fvec

std::string encode_fvec(const Dataset& ds) {
  detail::ByteWriter out;
  out.put_bytes(kFvecMagic);
  out.put(kFvecVersion);
  out.put(ds.dim());
  out.put(static_cast<std::uint32_t>(ds.labels().size()));
  for (const std::string& label : ds.labels()) {
    if (label.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw std::invalid_argument("label longer than 65535 bytes");
    }
    out.put(static_cast<std::uint16_t>(label.size()));
    out.put_bytes(label);
  }
  out.put(static_cast<std::uint64_t>(ds.size()));
  for (const FeatureVector& v : ds.vectors()) {
    out.put(v.id);
    out.put(v.label_id);
    for (float x : v.values) out.put_f32(x);
  }
  return std::move(out.str());
}

Dataset decode_fvec(std::span<const char> bytes) {
  detail::ByteReader in(bytes, "fvec");
  if (in.get_bytes(kFvecMagic.size()) != kFvecMagic) in.fail("bad magic");
  if (auto version = in.get<std::uint16_t>(); version != kFvecVersion) {
    in.fail("unsupported version " + std::to_string(version));
  }
  const auto dim = in.get<std::uint32_t>();
  if (dim == 0) in.fail("malformed header: dim is 0");
  const auto label_count = in.get<std::uint32_t>();
  std::vector<std::string> labels;
  for (std::uint32_t i = 0; i < label_count; ++i) {
    auto len = in.get<std::uint16_t>();
    labels.emplace_back(in.get_bytes(len));
  }
  const auto count = in.get<std::uint64_t>();
  const std::uint64_t record_bytes = 12 + 4ULL * dim;
  if (count > in.remaining() / record_bytes) in.fail("truncated input: vector count exceeds file size");

  std::vector<FeatureVector> vectors(count);
  std::unordered_map<std::uint64_t, std::size_t> seen;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::size_t record_start = in.offset();
    FeatureVector& v = vectors[i];
    v.id = in.get<std::uint64_t>();
    v.label_id = in.get<std::uint32_t>();
    v.values.resize(dim);
    for (float& x : v.values) x = in.get_f32();
    auto fail_record = [&](const std::string& msg) {
      throw FormatError("fvec: vector " + std::to_string(i) + " at byte offset " +
                        std::to_string(record_start) + ": " + msg);
    };
    if (v.label_id >= label_count) fail_record("label id out of range");
    if (!seen.emplace(v.id, i).second) fail_record("duplicate id " + std::to_string(v.id));
    if (!std::all_of(v.values.begin(), v.values.end(), [](float x) { return std::isfinite(x); })) {
      fail_record("non-finite value");
    }
  }
  if (!in.at_end()) in.fail("trailing bytes after last vector");
  try {
    return Dataset(dim, std::move(labels), std::move(vectors));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("fvec: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// csv

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <class T>
bool parse_number(std::string_view text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && first != last;
}

std::string format_float(float x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace

std::string encode_csv(const Dataset& ds) {
  std::string out = "id,label,dim=" + std::to_string(ds.dim()) + "\n";
  for (const FeatureVector& v : ds.vectors()) {
    const std::string& label = ds.label_name(v.label_id);
    if (label.find_first_of(",\r\n") != std::string::npos) {
      throw std::invalid_argument("label '" + label + "' cannot be written to csv");
    }
    out += std::to_string(v.id);
    out += ',';
    out += label;
    for (float x : v.values) {
      out += ',';
      out += format_float(x);
    }
    out += '\n';
  }
  return out;
}

Dataset decode_csv(const std::string& text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    line = std::string_view(text).substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    ++line_no;
    return true;
  };
  auto fail = [&](const std::string& msg) -> void {
    throw FormatError("csv: line " + std::to_string(line_no) + ": " + msg);
  };

  std::string_view line;
  if (!next_line(line)) throw FormatError("csv: line 1: missing header");
  auto header = split_fields(line);
  std::uint32_t dim = 0;
  if (header.size() != 3 || header[0] != "id" || header[1] != "label" ||
      !header[2].starts_with("dim=") || !parse_number(header[2].substr(4), dim) || dim == 0) {
    fail("malformed header, expected 'id,label,dim=<d>'");
  }

  std::vector<std::string> labels;
  std::unordered_map<std::string, std::uint32_t> label_ids;
  std::vector<FeatureVector> vectors;
  std::unordered_map<std::uint64_t, std::size_t> seen;
  while (next_line(line)) {
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 2 + static_cast<std::size_t>(dim)) {
      fail("dimension mismatch: " + std::to_string(fields.size() < 2 ? 0 : fields.size() - 2) +
           " values, expected " + std::to_string(dim));
    }
    FeatureVector v;
    if (!parse_number(fields[0], v.id)) fail("invalid id '" + std::string(fields[0]) + "'");
    std::string label(fields[1]);
    auto [it, inserted] = label_ids.emplace(label, static_cast<std::uint32_t>(labels.size()));
    if (inserted) labels.push_back(label);
    v.label_id = it->second;
    v.values.resize(dim);
    for (std::uint32_t j = 0; j < dim; ++j) {
      if (!parse_number(fields[2 + j], v.values[j])) {
        fail("invalid value '" + std::string(fields[2 + j]) + "' in column " + std::to_string(j));
      }
      if (!std::isfinite(v.values[j])) fail("non-finite value in column " + std::to_string(j));
    }
    if (!seen.emplace(v.id, vectors.size()).second) fail("duplicate id " + std::to_string(v.id));
    vectors.push_back(std::move(v));
  }
  return Dataset(dim, std::move(labels), std::move(vectors));
}

// ---------------------------------------------------------------------------
// files

DatasetFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DatasetFormat::csv : DatasetFormat::fvec;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  const std::string bytes = detail::read_file(path);
  try {
    return format == DatasetFormat::csv ? decode_csv(bytes) : decode_fvec(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, format_from_path(path));
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path, DatasetFormat format) {
  detail::write_file_atomic(path, format == DatasetFormat::csv ? encode_csv(ds) : encode_fvec(ds));
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  save_dataset(ds, path, format_from_path(path));
}

std::uint64_t fingerprint(const Dataset& ds) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : encode_fvec(ds)) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// construction helpers

Dataset generate_synthetic(std::uint32_t num_classes, std::uint32_t per_class, std::uint32_t dim,
                           double cluster_std, std::uint64_t seed) {
  if (num_classes == 0 || per_class == 0 || dim == 0) {
    throw std::invalid_argument("classes, per-class count and dim must be positive");
  }
  if (!(cluster_std >= 0.0) || !std::isfinite(cluster_std)) {
    throw std::invalid_argument("cluster_std must be a finite non-negative number");
  }
  Rng rng(seed);
  std::vector<std::vector<double>> centroids(num_classes, std::vector<double>(dim));
  for (auto& c : centroids) {
    for (double& x : c) x = rng.gaussian();
  }

  std::vector<std::string> labels;
  std::vector<FeatureVector> vectors;
  vectors.reserve(static_cast<std::size_t>(num_classes) * per_class);
  std::uint64_t next_id = 0;
  for (std::uint32_t c = 0; c < num_classes; ++c) {
    labels.push_back("class_" + std::to_string(c));
    for (std::uint32_t i = 0; i < per_class; ++i) {
      FeatureVector v{next_id++, c, std::vector<float>(dim)};
      for (std::uint32_t j = 0; j < dim; ++j) {
        v.values[j] = static_cast<float>(centroids[c][j] + cluster_std * rng.gaussian());
      }
      vectors.push_back(std::move(v));
    }
  }
  return Dataset(dim, std::move(labels), std::move(vectors));
}

Dataset merge_datasets(const Dataset& a, const Dataset& b, const std::string& prefix) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("cannot merge datasets of dimension " + std::to_string(a.dim()) +
                                " and " + std::to_string(b.dim()));
  }
  std::vector<std::string> labels = a.labels();
  const auto label_offset = static_cast<std::uint32_t>(labels.size());
  for (const std::string& label : b.labels()) labels.push_back(prefix + label);

  std::uint64_t next_id = 0;
  if (!a.empty()) {
    std::uint64_t max_id = 0;
    for (const FeatureVector& v : a.vectors()) max_id = std::max(max_id, v.id);
    if (max_id == std::numeric_limits<std::uint64_t>::max() && !b.empty()) {
      throw std::invalid_argument("no id space left above the first dataset");
    }
    next_id = max_id + 1;
  }

  std::vector<FeatureVector> vectors = a.vectors();
  std::vector<Source> sources =
      a.has_sources() ? a.sources() : std::vector<Source>(a.size(), Source::primary);
  vectors.reserve(a.size() + b.size());
  for (const FeatureVector& v : b.vectors()) {
    vectors.push_back(FeatureVector{next_id++, v.label_id + label_offset, v.values});
    sources.push_back(Source::distractor);
  }
  return Dataset(a.dim(), std::move(labels), std::move(vectors), std::move(sources));
}

namespace {

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& rows) {
  std::vector<FeatureVector> vectors;
  std::vector<Source> sources;
  vectors.reserve(rows.size());
  for (std::size_t row : rows) {
    vectors.push_back(ds[row]);
    if (ds.has_sources()) sources.push_back(ds.source(row));
  }
  return Dataset(ds.dim(), ds.labels(), std::move(vectors), std::move(sources));
}

std::vector<std::vector<std::size_t>> rows_by_class(const Dataset& ds) {
  std::vector<std::vector<std::size_t>> by_class(ds.labels().size());
  for (std::size_t row = 0; row < ds.size(); ++row) by_class[ds[row].label_id].push_back(row);
  return by_class;
}

}  // namespace

HoldoutSplit split_holdout(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("hold-out fraction must be in [0, 1)");
  }
  Rng rng(seed);
  std::vector<bool> held(ds.size(), false);
  for (auto& rows : rows_by_class(ds)) {
    const std::size_t n = rows.size();
    if (n < 2 || fraction == 0.0) continue;
    auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    take = std::clamp<std::size_t>(take, 1, n - 1);
    // Partial Fisher-Yates: the first `take` slots become the held-out rows.
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(rows[i], rows[i + rng.below(n - i)]);
      held[rows[i]] = true;
    }
  }
  std::vector<std::size_t> keep_rows, held_rows;
  for (std::size_t row = 0; row < ds.size(); ++row) (held[row] ? held_rows : keep_rows).push_back(row);
  return HoldoutSplit{subset(ds, keep_rows), subset(ds, held_rows)};
}

Dataset take_per_class(const Dataset& ds, std::size_t per_class) {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> taken(ds.labels().size(), 0);
  for (std::size_t row = 0; row < ds.size(); ++row) {
    if (taken[ds[row].label_id]++ < per_class) rows.push_back(row);
  }
  return subset(ds, rows);
}

}  // namespace lshir
