#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace lshir {

/// One labeled data point.
struct FeatureVector {
  std::uint64_t id = 0;
  std::uint32_t label_id = 0;
  std::vector<float> values;

  bool operator==(const FeatureVector&) const = default;
};

/// Which collection a vector came from after merge_datasets().
enum class Source : std::uint8_t { primary = 0, distractor = 1 };

enum class DatasetFormat { csv, fvec };

/// Immutable labeled collection of equal-length feature vectors.
///
/// The constructor validates every invariant (positive dim, unique ids,
/// label ids in range, matching lengths, finite values) and throws
/// std::invalid_argument naming the offending record otherwise.
class Dataset {
 public:
  Dataset(std::uint32_t dim, std::vector<std::string> labels,
          std::vector<FeatureVector> vectors, std::vector<Source> sources = {});

  std::uint32_t dim() const noexcept { return dim_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<FeatureVector>& vectors() const noexcept { return vectors_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool empty() const noexcept { return vectors_.empty(); }

  const FeatureVector& operator[](std::size_t row) const { return vectors_[row]; }

  /// Row index of `id`, if present.
  std::optional<std::size_t> row_of(std::uint64_t id) const;
  /// Vector with the given id; throws std::out_of_range if absent.
  const FeatureVector& by_id(std::uint64_t id) const;
  bool contains(std::uint64_t id) const { return row_of(id).has_value(); }

  const std::string& label_name(std::uint32_t label_id) const { return labels_.at(label_id); }
  std::optional<std::uint32_t> label_id(const std::string& name) const;

  /// True when per-vector source flags are attached (result of a merge).
  bool has_sources() const noexcept { return !sources_.empty(); }
  Source source(std::size_t row) const { return sources_.at(row); }
  const std::vector<Source>& sources() const noexcept { return sources_; }

  /// Vectors whose source flag equals `which`, same dim and label table.
  Dataset filter_by_source(Source which) const;

  bool operator==(const Dataset& other) const;

 private:
  std::uint32_t dim_;
  std::vector<std::string> labels_;
  std::vector<FeatureVector> vectors_;
  std::vector<Source> sources_;
  std::unordered_map<std::uint64_t, std::size_t> rows_;
};

/// Parses a dataset from a file. Errors carry the row (csv) or byte offset
/// (fvec) of the first problem found.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
/// Format chosen from the extension: ".csv" is csv, anything else fvec.
Dataset load_dataset(const std::filesystem::path& path);

void save_dataset(const Dataset& ds, const std::filesystem::path& path, DatasetFormat format);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

DatasetFormat format_from_path(const std::filesystem::path& path);

/// In-memory encodings used by the file functions.
std::string encode_fvec(const Dataset& ds);
Dataset decode_fvec(std::span<const char> bytes);
std::string encode_csv(const Dataset& ds);
Dataset decode_csv(const std::string& text);

/// FNV-1a 64 over the fvec encoding. Identifies the data an index was built on.
std::uint64_t fingerprint(const Dataset& ds);

/// Isotropic Gaussian mixture: centroids ~ N(0, 1) per coordinate, members
/// ~ centroid + N(0, cluster_std^2). Ids are 0..n-1 class by class; labels
/// are "class_<c>". Pure function of its arguments.
Dataset generate_synthetic(std::uint32_t num_classes, std::uint32_t per_class,
                           std::uint32_t dim, double cluster_std, std::uint64_t seed);

/// Union of `a` and `b`. b's ids are renumbered consecutively above a's
/// maximum id, b's labels are appended as `prefix + label`, and every vector
/// carries its source flag (a's existing flags are kept).
Dataset merge_datasets(const Dataset& a, const Dataset& b,
                       const std::string& prefix = "distractor:");

/// Per-class random split into (indexed, held_out). Each class with at least
/// two members holds out round(fraction * size) of them, clamped to
/// [1, size - 1]; singleton classes stay fully indexed.
struct HoldoutSplit {
  Dataset indexed;
  Dataset held_out;
};
HoldoutSplit split_holdout(const Dataset& ds, double fraction, std::uint64_t seed);

/// First `per_class` vectors of every class, in record order.
Dataset take_per_class(const Dataset& ds, std::size_t per_class);

}  // namespace lshir
