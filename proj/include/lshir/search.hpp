#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "lshir/dataset.hpp"
#include "lshir/metric.hpp"

namespace lshir {

/// Result depth meaning "rank every candidate".
inline constexpr std::size_t kAllResults = std::numeric_limits<std::size_t>::max();

struct Neighbor {
  std::uint64_t id = 0;
  double distance = 0.0;

  bool operator==(const Neighbor&) const = default;
};

/// Query cost accounting. distance_computations charges every retrieved
/// candidate including repeats across tables; candidates_examined counts the
/// distinct ones that were actually ranked.
struct QueryStats {
  std::uint64_t distance_computations = 0;
  std::uint64_t candidates_examined = 0;

  bool operator==(const QueryStats&) const = default;
};

struct QueryResult {
  std::vector<Neighbor> neighbors;
  QueryStats stats;

  bool operator==(const QueryResult&) const = default;
};

/// Anything that answers k-NN queries over a dataset.
class Searcher {
 public:
  virtual ~Searcher() = default;

  virtual const Dataset& dataset() const noexcept = 0;

  /// Top-k by `metric`, ascending distance, ties by ascending id.
  /// Throws std::invalid_argument on k == 0 or a query of the wrong length.
  virtual QueryResult query(std::span<const float> q, std::size_t k,
                            Metric metric = Metric::cosine) const = 0;
};

/// Exact ranking of the given distinct candidate ids (must exist in ds).
std::vector<Neighbor> rank_candidates(const Dataset& ds, std::span<const float> q,
                                      std::span<const std::uint64_t> candidate_ids,
                                      std::size_t k, Metric metric);

/// Sequential scan over the whole dataset.
class ExactScan final : public Searcher {
 public:
  explicit ExactScan(std::shared_ptr<const Dataset> ds);

  const Dataset& dataset() const noexcept override { return *ds_; }
  QueryResult query(std::span<const float> q, std::size_t k,
                    Metric metric = Metric::cosine) const override;

 private:
  std::shared_ptr<const Dataset> ds_;
};

/// Exact top-k over every vector of `ds`; distance_computations == ds.size().
QueryResult knn_exact(const Dataset& ds, std::span<const float> q, std::size_t k,
                      Metric metric = Metric::cosine);

void check_query(const Dataset& ds, std::span<const float> q, std::size_t k);

}  // namespace lshir
