#include "lshir/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "byte_io.hpp"
#include "lshir/error.hpp"

namespace lshir {

double average_precision(std::span<const std::uint64_t> ranked_ids, const IdSet& relevant) {
  if (relevant.empty()) throw std::invalid_argument("average precision needs a non-empty relevant set");
  IdSet hit;
  double sum = 0.0;
  for (std::size_t rank = 0; rank < ranked_ids.size(); ++rank) {
    const std::uint64_t id = ranked_ids[rank];
    if (relevant.contains(id) && hit.insert(id).second) {
      sum += static_cast<double>(hit.size()) / static_cast<double>(rank + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

double mean_average_precision(std::span<const RankedQuery> queries) {
  if (queries.empty()) throw std::invalid_argument("mean average precision needs at least one query");
  double sum = 0.0;
  for (const RankedQuery& q : queries) sum += average_precision(q.ranked_ids, q.relevant);
  return sum / static_cast<double>(queries.size());
}

double improvement_in_efficiency(std::uint64_t seq_cost, std::uint64_t index_cost) {
  if (seq_cost == 0) throw std::invalid_argument("sequential cost must be positive");
  if (index_cost == 0) throw std::invalid_argument("index cost must be positive");
  return static_cast<double>(seq_cost) / static_cast<double>(index_cost);
}

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("pearson: series lengths differ");
  if (xs.size() < 2) throw std::invalid_argument("pearson: need at least two points");
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("pearson: constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(std::span<const double> xs) {
  if (xs.empty()) return {};
  const auto n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

template <class Tables>
BucketStatistics statistics_of(const Tables& tables, const Dataset& ds) {
  std::vector<std::vector<std::uint32_t>> labels;
  labels.reserve(tables.bucket_count());
  for (const auto& table : tables.all()) {
    for (const auto& [key, ids] : table) {
      auto& bucket = labels.emplace_back();
      bucket.reserve(ids.size());
      for (std::uint64_t id : ids) bucket.push_back(ds.by_id(id).label_id);
    }
  }
  return bucket_statistics(labels);
}

}  // namespace

BucketStatistics bucket_statistics(std::span<const std::vector<std::uint32_t>> bucket_labels) {
  std::vector<double> purity, sizes;
  BucketStatistics s;
  std::unordered_map<std::uint32_t, std::size_t> counts;
  for (const auto& bucket : bucket_labels) {
    if (bucket.empty()) continue;
    counts.clear();
    std::size_t majority = 0;
    for (std::uint32_t label : bucket) majority = std::max(majority, ++counts[label]);
    purity.push_back(static_cast<double>(majority) / static_cast<double>(bucket.size()));
    sizes.push_back(static_cast<double>(bucket.size()));
    s.num_items += bucket.size();
  }
  s.num_buckets = purity.size();
  const MeanStd p = mean_std(purity);
  const MeanStd z = mean_std(sizes);
  s.avg_purity = p.mean;
  s.std_purity = p.std;
  s.avg_per_bucket = s.num_buckets ? static_cast<double>(s.num_items) / static_cast<double>(s.num_buckets) : 0.0;
  s.std_per_bucket = z.std;
  return s;
}

BucketStatistics bucket_statistics(const RealLshIndex& index) {
  return statistics_of(index.tables(), index.dataset());
}

BucketStatistics bucket_statistics(const BinaryLshIndex& index) {
  return statistics_of(index.tables(), index.dataset());
}

// ---------------------------------------------------------------------------

IndexKind parse_index_kind(std::string_view name) {
  if (name == "none" || name == "exact") return IndexKind::none;
  if (name == "real") return IndexKind::real;
  if (name == "binary") return IndexKind::binary;
  throw std::invalid_argument("unknown index kind '" + std::string(name) + "'");
}

std::string_view to_string(IndexKind kind) noexcept {
  switch (kind) {
    case IndexKind::real: return "real";
    case IndexKind::binary: return "binary";
    case IndexKind::none: break;
  }
  return "none";
}

std::unique_ptr<Searcher> make_searcher(std::shared_ptr<const Dataset> ds, const EvalConfig& config) {
  switch (config.kind) {
    case IndexKind::real:
      return std::make_unique<RealLshIndex>(
          RealLshIndex::build(std::move(ds), RealLshParams{config.L, config.K, config.w, config.seed}));
    case IndexKind::binary:
      return std::make_unique<BinaryLshIndex>(
          BinaryLshIndex::build(std::move(ds), BinaryLshParams{config.L, config.K, config.seed}));
    case IndexKind::none: break;
  }
  return std::make_unique<ExactScan>(std::move(ds));
}

namespace {

/// Relevant ids per class of the indexed set, keyed by label name.
class ClassMembers {
 public:
  explicit ClassMembers(const Dataset& indexed) : by_label_(indexed.labels().size()) {
    for (const FeatureVector& v : indexed.vectors()) by_label_[v.label_id].insert(v.id);
    for (std::uint32_t i = 0; i < indexed.labels().size(); ++i) index_.emplace(indexed.labels()[i], i);
  }

  IdSet of(const std::string& label) const {
    auto it = index_.find(label);
    return it == index_.end() ? IdSet{} : by_label_[it->second];
  }

 private:
  std::vector<IdSet> by_label_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct ScoredQuery {
  double ap = 0.0;
  std::uint64_t cost = 0;  // distance computations, at least 1
  bool empty = false;
};

ScoredQuery score_query(const Searcher& searcher, const ClassMembers& members,
                        const FeatureVector& q, const std::string& label, std::size_t depth,
                        Metric metric) {
  const Dataset& indexed = searcher.dataset();
  const auto row = indexed.row_of(q.id);
  const bool self = row && indexed[*row].values == q.values;
  IdSet relevant = members.of(label);
  if (self) relevant.erase(q.id);
  if (relevant.empty()) {
    throw std::invalid_argument("query " + std::to_string(q.id) + " of class '" + label +
                                "' has no other indexed member of its class");
  }
  const std::size_t fetch = self && depth != kAllResults ? depth + 1 : depth;
  QueryResult result = searcher.query(q.values, fetch, metric);

  std::vector<std::uint64_t> ranked;
  ranked.reserve(result.neighbors.size());
  for (const Neighbor& n : result.neighbors) {
    if (self && n.id == q.id) continue;
    if (ranked.size() == depth) break;
    ranked.push_back(n.id);
  }
  ScoredQuery out;
  out.ap = average_precision(ranked, relevant);
  out.cost = result.stats.distance_computations;
  if (out.cost == 0) {
    out.empty = true;
    out.cost = 1;
  }
  return out;
}

void check_depth(std::size_t depth) {
  if (depth == 0) throw std::invalid_argument("evaluation depth must be positive");
}

}  // namespace

EvalReport evaluate_config(std::shared_ptr<const Dataset> indexed, const Dataset& queries,
                           const EvalConfig& config) {
  check_depth(config.depth);
  if (queries.empty()) throw std::invalid_argument("no queries to evaluate");
  auto searcher = make_searcher(indexed, config);
  const ClassMembers members(*indexed);

  EvalReport report;
  std::uint64_t seq_total = 0, index_total = 0;
  double ap_sum = 0.0;
  report.per_query_ie.reserve(queries.size());
  for (const FeatureVector& q : queries.vectors()) {
    ScoredQuery s = score_query(*searcher, members, q, queries.label_name(q.label_id),
                                config.depth, config.metric);
    ap_sum += s.ap;
    seq_total += indexed->size();
    index_total += s.cost;
    report.empty_queries += s.empty ? 1 : 0;
    report.per_query_ie.push_back(improvement_in_efficiency(indexed->size(), s.cost));
  }
  report.mAP = ap_sum / static_cast<double>(queries.size());
  report.IE = improvement_in_efficiency(seq_total, index_total);

  if (const auto* real = dynamic_cast<const RealLshIndex*>(searcher.get())) {
    report.L = config.L;
    report.K = config.K;
    report.buckets = bucket_statistics(*real);
  } else if (const auto* binary = dynamic_cast<const BinaryLshIndex*>(searcher.get())) {
    report.L = config.L;
    report.K = config.K;
    report.buckets = bucket_statistics(*binary);
  } else {
    report.L = 1;
    report.K = 0;
    std::vector<std::vector<std::uint32_t>> whole(1);
    for (const FeatureVector& v : indexed->vectors()) whole[0].push_back(v.label_id);
    report.buckets = bucket_statistics(whole);
  }
  return report;
}

std::vector<EvalReport> parameter_sweep(std::shared_ptr<const Dataset> indexed,
                                        const Dataset& queries,
                                        std::span<const std::uint32_t> L_values,
                                        std::span<const std::uint32_t> K_values,
                                        const EvalConfig& base, unsigned threads) {
  if (L_values.empty() || K_values.empty()) throw std::invalid_argument("empty parameter grid");
  const std::size_t cells = L_values.size() * K_values.size();
  std::vector<EvalReport> reports(cells);
  std::vector<std::exception_ptr> errors(cells);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t cell = next++; cell < cells; cell = next++) {
      EvalConfig config = base;
      config.L = L_values[cell / K_values.size()];
      config.K = K_values[cell % K_values.size()];
      try {
        reports[cell] = evaluate_config(indexed, queries, config);
      } catch (...) {
        errors[cell] = std::current_exception();
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

namespace {

void append_number(std::string& out, double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, ptr);
}

}  // namespace

std::string sweep_csv(std::span<const EvalReport> reports) {
  std::string out(kSweepCsvHeader);
  out += '\n';
  for (const EvalReport& r : reports) {
    out += std::to_string(r.L) + ',' + std::to_string(r.K) + ',';
    append_number(out, r.mAP);
    out += ',';
    append_number(out, r.IE);
    out += ',';
    append_number(out, r.buckets.avg_purity);
    out += ',';
    append_number(out, r.buckets.std_purity);
    out += ',' + std::to_string(r.buckets.num_buckets) + ',' + std::to_string(r.buckets.num_items) + ',';
    append_number(out, r.buckets.avg_per_bucket);
    out += ',';
    append_number(out, r.buckets.std_per_bucket);
    out += '\n';
  }
  return out;
}

std::optional<EvalReport> best_tradeoff(std::span<const EvalReport> reports, double min_ie) {
  const EvalReport* best = nullptr;
  for (const EvalReport& r : reports) {
    if (r.IE >= min_ie && (!best || r.mAP > best->mAP)) best = &r;
  }
  if (!best) return std::nullopt;
  return *best;
}

// ---------------------------------------------------------------------------

std::vector<ClassReport> class_analysis(std::shared_ptr<const Dataset> ds, const EvalConfig& config) {
  const Dataset& queries = *ds;
  return class_analysis(std::move(ds), queries, config);
}

std::vector<ClassReport> class_analysis(std::shared_ptr<const Dataset> indexed,
                                        const Dataset& queries, const EvalConfig& config) {
  check_depth(config.depth);
  auto searcher = make_searcher(indexed, config);
  const ClassMembers members(*indexed);

  std::vector<std::vector<const FeatureVector*>> by_class(queries.labels().size());
  for (const FeatureVector& v : queries.vectors()) by_class[v.label_id].push_back(&v);

  std::vector<ClassReport> reports;
  for (std::uint32_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].empty()) continue;
    ClassReport report;
    report.class_label = queries.label_name(c);
    for (const FeatureVector* q : by_class[c]) {
      ScoredQuery s;
      try {
        s = score_query(*searcher, members, *q, report.class_label, config.depth, config.metric);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("class '" + report.class_label +
                                    "' has fewer than 2 samples to compare: " + e.what());
      }
      report.query_aps.push_back({q->id, s.ap});
    }

    std::vector<double> aps;
    for (const QueryAp& qa : report.query_aps) aps.push_back(qa.ap);
    const MeanStd ms = mean_std(aps);
    report.mAP = ms.mean;
    report.std_ap = ms.std;
    const QueryAp* best = &report.query_aps.front();
    const QueryAp* worst = best;
    for (const QueryAp& qa : report.query_aps) {
      if (qa.ap > best->ap || (qa.ap == best->ap && qa.id < best->id)) best = &qa;
      if (qa.ap < worst->ap || (qa.ap == worst->ap && qa.id < worst->id)) worst = &qa;
    }
    report.max_ap = best->ap;
    report.min_ap = worst->ap;
    report.range_ap = report.max_ap - report.min_ap;
    report.best_id = best->id;
    report.worst_id = worst->id;
    // The mean of equal values can round a hair outside [min, max].
    report.mAP = std::clamp(report.mAP, report.min_ap, report.max_ap);
    reports.push_back(std::move(report));
  }
  return reports;
}

std::string class_report_json(const ClassReport& report, bool include_query_aps) {
  nlohmann::ordered_json j;
  j["class_label"] = report.class_label;
  j["mAP"] = report.mAP;
  j["min_ap"] = report.min_ap;
  j["max_ap"] = report.max_ap;
  j["range_ap"] = report.range_ap;
  j["std_ap"] = report.std_ap;
  j["best_id"] = report.best_id;
  j["worst_id"] = report.worst_id;
  if (include_query_aps) {
    auto& arr = j["query_aps"] = nlohmann::ordered_json::array();
    for (const QueryAp& qa : report.query_aps) arr.push_back({{"id", qa.id}, {"ap", qa.ap}});
  }
  return j.dump();
}

// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, double>> load_class_metrics(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<std::pair<std::string, double>> rows;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 0, pos = 0;
  bool header = true;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line = std::string_view(text).substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto fail = [&](const std::string& msg) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) + ": " + msg);
    };
    if (header) {
      if (line != "class,value") fail("expected header 'class,value'");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string_view::npos) fail("expected 'class,value'");
    std::string name(line.substr(0, comma));
    std::string_view num = line.substr(comma + 1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
    if (ec != std::errc() || ptr != num.data() + num.size() || num.empty() || !std::isfinite(value)) {
      fail("invalid value '" + std::string(num) + "'");
    }
    if (!seen.emplace(name, rows.size()).second) fail("duplicate class '" + name + "'");
    rows.emplace_back(std::move(name), value);
  }
  if (header) throw FormatError(path.string() + ": missing header");
  return rows;
}

double class_metric_correlation(std::span<const std::pair<std::string, double>> xs,
                                std::span<const std::pair<std::string, double>> ys) {
  std::unordered_map<std::string, double> y_of(ys.begin(), ys.end());
  if (y_of.size() != xs.size()) throw std::invalid_argument("class sets differ between metric tables");
  std::vector<double> a, b;
  for (const auto& [name, x] : xs) {
    auto it = y_of.find(name);
    if (it == y_of.end()) throw std::invalid_argument("class '" + name + "' missing from second table");
    a.push_back(x);
    b.push_back(it->second);
  }
  return pearson_correlation(a, b);
}

double distractor_contamination(const Searcher& searcher, std::span<const FeatureVector> queries,
                                std::size_t k, Metric metric) {
  const Dataset& ds = searcher.dataset();
  if (!ds.has_sources()) throw std::invalid_argument("indexed dataset carries no source flags");
  std::uint64_t total = 0, foreign = 0;
  for (const FeatureVector& q : queries) {
    for (const Neighbor& n : searcher.query(q.values, k, metric).neighbors) {
      ++total;
      if (ds.source(*ds.row_of(n.id)) == Source::distractor) ++foreign;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(foreign) / static_cast<double>(total);
}

}  // namespace lshir
