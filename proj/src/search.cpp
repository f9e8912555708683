#include "lshir/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lshir {

void check_query(const Dataset& ds, std::span<const float> q, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (q.size() != ds.dim()) {
    throw std::invalid_argument("query has " + std::to_string(q.size()) + " values, expected " +
                                std::to_string(ds.dim()));
  }
  if (!std::all_of(q.begin(), q.end(), [](float x) { return std::isfinite(x); })) {
    throw std::invalid_argument("query contains a non-finite value");
  }
}

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
}

std::vector<Neighbor> top_k(std::vector<Neighbor> scored, std::size_t k) {
  if (k < scored.size()) {
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                      closer);
    scored.resize(k);
  } else {
    std::sort(scored.begin(), scored.end(), closer);
  }
  return scored;
}

}  // namespace

std::vector<Neighbor> rank_candidates(const Dataset& ds, std::span<const float> q,
                                      std::span<const std::uint64_t> candidate_ids, std::size_t k,
                                      Metric metric) {
  std::vector<Neighbor> scored;
  scored.reserve(candidate_ids.size());
  for (std::uint64_t id : candidate_ids) {
    scored.push_back({id, distance(metric, q, ds.by_id(id).values)});
  }
  return top_k(std::move(scored), k);
}

QueryResult knn_exact(const Dataset& ds, std::span<const float> q, std::size_t k, Metric metric) {
  check_query(ds, q, k);
  std::vector<Neighbor> scored;
  scored.reserve(ds.size());
  for (const FeatureVector& v : ds.vectors()) scored.push_back({v.id, distance(metric, q, v.values)});
  QueryResult result;
  result.stats.distance_computations = ds.size();
  result.stats.candidates_examined = ds.size();
  result.neighbors = top_k(std::move(scored), k);
  return result;
}

ExactScan::ExactScan(std::shared_ptr<const Dataset> ds) : ds_(std::move(ds)) {
  if (!ds_) throw std::invalid_argument("null dataset");
}

QueryResult ExactScan::query(std::span<const float> q, std::size_t k, Metric metric) const {
  return knn_exact(*ds_, q, k, metric);
}

}  // namespace lshir
