#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lshir/dataset.hpp"
#include "lshir/lsh_binary.hpp"
#include "lshir/lsh_real.hpp"
#include "lshir/search.hpp"

namespace lshir {

// ---------------------------------------------------------------------------
// Retrieval metrics
// ---------------------------------------------------------------------------

using IdSet = std::unordered_set<std::uint64_t>;

/// Sum of precision@r over the ranks r holding a relevant id, divided by
/// |relevant|. Throws std::invalid_argument for an empty relevant set.
double average_precision(std::span<const std::uint64_t> ranked_ids, const IdSet& relevant);

struct RankedQuery {
  std::vector<std::uint64_t> ranked_ids;
  IdSet relevant;
};

/// Arithmetic mean of per-query AP. Throws on an empty query list.
double mean_average_precision(std::span<const RankedQuery> queries);

/// seq_cost / index_cost. Throws std::invalid_argument unless both are positive.
double improvement_in_efficiency(std::uint64_t seq_cost, std::uint64_t index_cost);

/// Pearson product-moment correlation. Throws std::invalid_argument on a
/// length mismatch, fewer than two points, or a constant series.
double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

// ---------------------------------------------------------------------------
// Bucket statistics
// ---------------------------------------------------------------------------

struct BucketStatistics {
  double avg_purity = 0.0;  ///< unweighted mean of majority-class share per bucket
  double std_purity = 0.0;  ///< population std of the same
  std::uint64_t num_buckets = 0;
  std::uint64_t num_items = 0;
  double avg_per_bucket = 0.0;
  double std_per_bucket = 0.0;

  bool operator==(const BucketStatistics&) const = default;
};

/// Statistics over non-empty buckets given as lists of class labels.
BucketStatistics bucket_statistics(std::span<const std::vector<std::uint32_t>> bucket_labels);
BucketStatistics bucket_statistics(const RealLshIndex& index);
BucketStatistics bucket_statistics(const BinaryLshIndex& index);

// ---------------------------------------------------------------------------
// Configurations and sweeps
// ---------------------------------------------------------------------------

enum class IndexKind { none, real, binary };

IndexKind parse_index_kind(std::string_view name);
std::string_view to_string(IndexKind kind) noexcept;

struct EvalConfig {
  IndexKind kind = IndexKind::none;
  std::uint32_t L = 1;
  std::uint32_t K = 1;
  double w = 4.0;
  std::uint64_t seed = 0;
  std::size_t depth = kAllResults;  ///< ranked-list length fed to AP
  Metric metric = Metric::cosine;
};

/// Exact scan for IndexKind::none, otherwise an index built from `config`.
std::unique_ptr<Searcher> make_searcher(std::shared_ptr<const Dataset> ds, const EvalConfig& config);

/// One row of a parameter study.
struct EvalReport {
  std::uint32_t L = 0;
  std::uint32_t K = 0;
  double mAP = 0.0;
  double IE = 0.0;
  BucketStatistics buckets;

  /// Per-query seq/index cost ratios, in query order.
  std::vector<double> per_query_ie;
  /// Queries whose candidate set was empty (charged a cost of 1).
  std::uint64_t empty_queries = 0;
};

/// Runs every query in `queries` against an index over `indexed`.
///
/// Relevant items of a query are the indexed vectors of the same class
/// (matched by label name). A query that is itself indexed (same id and
/// values) is dropped from both its result list and its relevant set. IE is
/// total sequential cost over total index cost. For IndexKind::none the
/// report has L = 1, K = 0, IE = 1 and describes the whole dataset as a
/// single bucket.
EvalReport evaluate_config(std::shared_ptr<const Dataset> indexed, const Dataset& queries,
                           const EvalConfig& config);

/// One report per (L, K), L-major grid order. Cells are independent and may
/// run on `threads` workers; output does not depend on the thread count.
std::vector<EvalReport> parameter_sweep(std::shared_ptr<const Dataset> indexed,
                                        const Dataset& queries,
                                        std::span<const std::uint32_t> L_values,
                                        std::span<const std::uint32_t> K_values,
                                        const EvalConfig& base, unsigned threads = 1);

inline constexpr std::string_view kSweepCsvHeader =
    "L,K,mAP,IE,avg_purity,std_purity,num_buckets,num_items,avg_per_bucket,std_per_bucket";

std::string sweep_csv(std::span<const EvalReport> reports);

/// Highest-mAP row among those with IE >= min_ie; first in grid order on ties.
std::optional<EvalReport> best_tradeoff(std::span<const EvalReport> reports, double min_ie);

// ---------------------------------------------------------------------------
// Class-by-class analysis
// ---------------------------------------------------------------------------

struct QueryAp {
  std::uint64_t id = 0;
  double ap = 0.0;
};

struct ClassReport {
  std::string class_label;
  double mAP = 0.0;
  double min_ap = 0.0;
  double max_ap = 0.0;
  double range_ap = 0.0;
  double std_ap = 0.0;
  std::uint64_t best_id = 0;
  std::uint64_t worst_id = 0;

  std::vector<QueryAp> query_aps;
};

/// Queries every member of every class against the rest of `ds`. Classes
/// with no members are skipped; a class with a single member is an error.
std::vector<ClassReport> class_analysis(std::shared_ptr<const Dataset> ds, const EvalConfig& config);

/// Same, with queries taken from a separate (e.g. held-out) set.
std::vector<ClassReport> class_analysis(std::shared_ptr<const Dataset> indexed,
                                        const Dataset& queries, const EvalConfig& config);

/// One JSON object (single line) with the ClassReport fields; per-query APs
/// are appended as "query_aps" when requested.
std::string class_report_json(const ClassReport& report, bool include_query_aps = false);

// ---------------------------------------------------------------------------
// Per-class metric files and distractors
// ---------------------------------------------------------------------------

/// Reads a `class,value` CSV (header line required).
std::vector<std::pair<std::string, double>> load_class_metrics(const std::filesystem::path& path);

/// Pearson correlation of two per-class tables joined on class name.
/// Throws if the class sets differ.
double class_metric_correlation(std::span<const std::pair<std::string, double>> xs,
                                std::span<const std::pair<std::string, double>> ys);

/// Fraction of all top-k results, over every query, that came from the
/// distractor source. The searcher's dataset must carry source flags.
double distractor_contamination(const Searcher& searcher, std::span<const FeatureVector> queries,
                                std::size_t k, Metric metric = Metric::cosine);

}  // namespace lshir
