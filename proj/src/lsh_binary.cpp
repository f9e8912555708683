#include "lshir/lsh_binary.hpp"

#include <stdexcept>

#include "lshir/random.hpp"

namespace lshir {

void BinaryLshParams::validate() const {
  if (L < 1) throw std::invalid_argument("L must be at least 1");
  if (K < 1 || K > kMaxSignatureBits) throw std::invalid_argument("K must be in [1, 64]");
}

bool hash_bit(std::span<const float> r, std::span<const float> v) noexcept {
  return dot(r, v) >= 0.0;
}

Hyperplane draw_hyperplane(std::uint64_t seed, std::size_t table, std::size_t slot,
                           std::uint32_t dim) {
  Rng rng(derive_seed(seed, table, slot));
  Hyperplane h;
  h.normal.resize(dim);
  for (float& x : h.normal) x = static_cast<float>(rng.gaussian());
  return h;
}

BinaryLshIndex BinaryLshIndex::build(std::shared_ptr<const Dataset> ds,
                                     const BinaryLshParams& params) {
  params.validate();
  if (!ds) throw std::invalid_argument("null dataset");
  std::vector<Hyperplane> planes;
  planes.reserve(static_cast<std::size_t>(params.L) * params.K);
  for (std::uint32_t t = 0; t < params.L; ++t) {
    for (std::uint32_t j = 0; j < params.K; ++j) {
      planes.push_back(draw_hyperplane(params.seed, t, j, ds->dim()));
    }
  }
  return BinaryLshIndex(std::move(ds), params, std::move(planes));
}

BinaryLshIndex BinaryLshIndex::build_with_hyperplanes(std::shared_ptr<const Dataset> ds,
                                                      const BinaryLshParams& params,
                                                      std::vector<Hyperplane> hyperplanes) {
  params.validate();
  if (!ds) throw std::invalid_argument("null dataset");
  return BinaryLshIndex(std::move(ds), params, std::move(hyperplanes));
}

BinaryLshIndex::BinaryLshIndex(std::shared_ptr<const Dataset> ds, BinaryLshParams params,
                               std::vector<Hyperplane> hyperplanes)
    : ds_(std::move(ds)), params_(params), dim_(ds_->dim()), hyperplanes_(std::move(hyperplanes)),
      tables_(params.L) {
  if (ds_->empty()) throw std::invalid_argument("cannot index an empty dataset");
  if (hyperplanes_.size() != static_cast<std::size_t>(params_.L) * params_.K) {
    throw std::invalid_argument("expected L*K hyperplanes");
  }
  for (const Hyperplane& h : hyperplanes_) {
    if (h.normal.size() != dim_) throw std::invalid_argument("hyperplane dimension mismatch");
  }
  for (const FeatureVector& v : ds_->vectors()) {
    for (std::uint32_t t = 0; t < params_.L; ++t) tables_.insert(t, signature(t, v.values), v.id);
  }
}

const Hyperplane& BinaryLshIndex::hyperplane(std::size_t table, std::size_t slot) const {
  if (table >= params_.L || slot >= params_.K) throw std::out_of_range("hyperplane slot out of range");
  return hyperplanes_[table * params_.K + slot];
}

Signature BinaryLshIndex::signature(std::size_t table, std::span<const float> v) const {
  if (table >= params_.L) {
    throw std::out_of_range("table " + std::to_string(table) + " out of range (L = " +
                            std::to_string(params_.L) + ")");
  }
  Signature sig = 0;
  for (std::uint32_t j = 0; j < params_.K; ++j) {
    sig = (sig << 1) | static_cast<Signature>(hash_bit(hyperplanes_[table * params_.K + j].normal, v));
  }
  return sig;
}

CandidateSet BinaryLshIndex::candidates(std::span<const float> q) const {
  return collect_candidates(tables_, [&](std::size_t t) { return signature(t, q); });
}

QueryResult BinaryLshIndex::query(std::span<const float> q, std::size_t k, Metric metric) const {
  check_query(*ds_, q, k);
  CandidateSet c = candidates(q);
  QueryResult result;
  result.stats.distance_computations = c.retrieved;
  result.stats.candidates_examined = c.ids.size();
  result.neighbors = rank_candidates(*ds_, q, c.ids, k, metric);
  return result;
}

}  // namespace lshir
