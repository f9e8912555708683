#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lshir/bucket_tables.hpp"
#include "lshir/search.hpp"

namespace lshir {

struct RealLshParams {
  std::uint32_t L = 1;   ///< number of tables (g functions)
  std::uint32_t K = 1;   ///< projections concatenated per table
  double w = 4.0;        ///< segment width
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const RealLshParams&) const = default;
};

/// One floor-projection hash: direction X ~ N(0, I), offset b ~ U[0, w].
/// Coefficients are held in single precision; the same values are written to
/// and read from snapshots, so hashes survive a round-trip bit for bit.
struct ProjectionFunction {
  std::vector<float> direction;
  float offset = 0.0f;

  bool operator==(const ProjectionFunction&) const = default;
};

using RealKey = std::vector<std::int64_t>;

/// floor((p . X + b) / w), rounded toward negative infinity and saturated to
/// the int64 range.
std::int64_t hash_h(std::span<const float> p, const ProjectionFunction& f, double w);

/// The function at (table, slot), drawn from its own child stream.
ProjectionFunction draw_projection(std::uint64_t seed, std::size_t table, std::size_t slot,
                                   std::uint32_t dim, double w);

/// Random-projection LSH over real vectors: L tables keyed by K-tuples of
/// hash_h values. Frozen after construction; queries are const and thread-safe.
class RealLshIndex final : public Searcher {
 public:
  static RealLshIndex build(std::shared_ptr<const Dataset> ds, const RealLshParams& params);

  /// Builds with caller-supplied functions, laid out table-major
  /// (functions[t * K + j]).
  static RealLshIndex build_with_functions(std::shared_ptr<const Dataset> ds,
                                           const RealLshParams& params,
                                           std::vector<ProjectionFunction> functions);

  const RealLshParams& params() const noexcept { return params_; }
  std::uint32_t dim() const noexcept { return dim_; }
  const std::vector<ProjectionFunction>& functions() const noexcept { return functions_; }
  const ProjectionFunction& function(std::size_t table, std::size_t slot) const;
  const BucketTables<RealKey>& tables() const noexcept { return tables_; }

  const Dataset& dataset() const noexcept override { return *ds_; }
  const std::shared_ptr<const Dataset>& shared_dataset() const noexcept { return ds_; }

  /// Key of p in table `table`; throws std::out_of_range if table >= L.
  RealKey hash_g(std::size_t table, std::span<const float> p) const;

  CandidateSet candidates(std::span<const float> q) const;

  QueryResult query(std::span<const float> q, std::size_t k,
                    Metric metric = Metric::cosine) const override;

 private:
  RealLshIndex(std::shared_ptr<const Dataset> ds, RealLshParams params,
               std::vector<ProjectionFunction> functions);

  std::shared_ptr<const Dataset> ds_;
  RealLshParams params_;
  std::uint32_t dim_;
  std::vector<ProjectionFunction> functions_;
  BucketTables<RealKey> tables_;
};

}  // namespace lshir
