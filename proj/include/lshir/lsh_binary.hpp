#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lshir/bucket_tables.hpp"
#include "lshir/search.hpp"

namespace lshir {

inline constexpr std::uint32_t kMaxSignatureBits = 64;

struct BinaryLshParams {
  std::uint32_t L = 1;
  std::uint32_t K = 1;  ///< bits per signature, at most 64
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const BinaryLshParams&) const = default;
};

/// Random hyperplane through the origin, normal ~ N(0, I).
struct Hyperplane {
  std::vector<float> normal;

  bool operator==(const Hyperplane&) const = default;
};

/// K-bit signature, bit 0 of the concatenation in the most significant used
/// position (bit K-1 of the word).
using Signature = std::uint64_t;

/// 1 when r . v >= 0 (a zero dot product hashes to 1), else 0.
bool hash_bit(std::span<const float> r, std::span<const float> v) noexcept;

Hyperplane draw_hyperplane(std::uint64_t seed, std::size_t table, std::size_t slot,
                           std::uint32_t dim);

/// SimHash index: L tables keyed by K random-hyperplane sign bits.
class BinaryLshIndex final : public Searcher {
 public:
  static BinaryLshIndex build(std::shared_ptr<const Dataset> ds, const BinaryLshParams& params);
  static BinaryLshIndex build_with_hyperplanes(std::shared_ptr<const Dataset> ds,
                                               const BinaryLshParams& params,
                                               std::vector<Hyperplane> hyperplanes);

  const BinaryLshParams& params() const noexcept { return params_; }
  std::uint32_t dim() const noexcept { return dim_; }
  const std::vector<Hyperplane>& hyperplanes() const noexcept { return hyperplanes_; }
  const Hyperplane& hyperplane(std::size_t table, std::size_t slot) const;
  const BucketTables<Signature>& tables() const noexcept { return tables_; }

  const Dataset& dataset() const noexcept override { return *ds_; }
  const std::shared_ptr<const Dataset>& shared_dataset() const noexcept { return ds_; }

  Signature signature(std::size_t table, std::span<const float> v) const;

  CandidateSet candidates(std::span<const float> q) const;

  QueryResult query(std::span<const float> q, std::size_t k,
                    Metric metric = Metric::cosine) const override;

 private:
  BinaryLshIndex(std::shared_ptr<const Dataset> ds, BinaryLshParams params,
                 std::vector<Hyperplane> hyperplanes);

  std::shared_ptr<const Dataset> ds_;
  BinaryLshParams params_;
  std::uint32_t dim_;
  std::vector<Hyperplane> hyperplanes_;
  BucketTables<Signature> tables_;
};

}  // namespace lshir
