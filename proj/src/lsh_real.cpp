#include "lshir/lsh_real.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lshir/random.hpp"

namespace lshir {

void RealLshParams::validate() const {
  if (L < 1) throw std::invalid_argument("L must be at least 1");
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("w must be positive and finite");
}

std::int64_t hash_h(std::span<const float> p, const ProjectionFunction& f, double w) {
  const double bucket = std::floor((dot(p, f.direction) + static_cast<double>(f.offset)) / w);
  constexpr double kLimit = 9223372036854775808.0;  // 2^63
  if (bucket >= kLimit) return std::numeric_limits<std::int64_t>::max();
  if (bucket < -kLimit) return std::numeric_limits<std::int64_t>::min();
  return static_cast<std::int64_t>(bucket);
}

ProjectionFunction draw_projection(std::uint64_t seed, std::size_t table, std::size_t slot,
                                   std::uint32_t dim, double w) {
  Rng rng(derive_seed(seed, table, slot));
  ProjectionFunction f;
  f.direction.resize(dim);
  for (float& x : f.direction) x = static_cast<float>(rng.gaussian());
  f.offset = static_cast<float>(rng.uniform() * w);
  // Single-precision rounding must not push b past w.
  while (static_cast<double>(f.offset) > w) f.offset = std::nextafter(f.offset, 0.0f);
  return f;
}

RealLshIndex RealLshIndex::build(std::shared_ptr<const Dataset> ds, const RealLshParams& params) {
  params.validate();
  if (!ds) throw std::invalid_argument("null dataset");
  std::vector<ProjectionFunction> functions;
  functions.reserve(static_cast<std::size_t>(params.L) * params.K);
  for (std::uint32_t t = 0; t < params.L; ++t) {
    for (std::uint32_t j = 0; j < params.K; ++j) {
      functions.push_back(draw_projection(params.seed, t, j, ds->dim(), params.w));
    }
  }
  return RealLshIndex(std::move(ds), params, std::move(functions));
}

RealLshIndex RealLshIndex::build_with_functions(std::shared_ptr<const Dataset> ds,
                                                const RealLshParams& params,
                                                std::vector<ProjectionFunction> functions) {
  params.validate();
  if (!ds) throw std::invalid_argument("null dataset");
  return RealLshIndex(std::move(ds), params, std::move(functions));
}

RealLshIndex::RealLshIndex(std::shared_ptr<const Dataset> ds, RealLshParams params,
                           std::vector<ProjectionFunction> functions)
    : ds_(std::move(ds)), params_(params), dim_(ds_->dim()), functions_(std::move(functions)),
      tables_(params.L) {
  if (ds_->empty()) throw std::invalid_argument("cannot index an empty dataset");
  if (functions_.size() != static_cast<std::size_t>(params_.L) * params_.K) {
    throw std::invalid_argument("expected L*K projection functions");
  }
  for (const ProjectionFunction& f : functions_) {
    if (f.direction.size() != dim_) throw std::invalid_argument("projection dimension mismatch");
  }
  for (const FeatureVector& v : ds_->vectors()) {
    for (std::uint32_t t = 0; t < params_.L; ++t) tables_.insert(t, hash_g(t, v.values), v.id);
  }
}

const ProjectionFunction& RealLshIndex::function(std::size_t table, std::size_t slot) const {
  if (table >= params_.L || slot >= params_.K) throw std::out_of_range("function slot out of range");
  return functions_[table * params_.K + slot];
}

RealKey RealLshIndex::hash_g(std::size_t table, std::span<const float> p) const {
  if (table >= params_.L) {
    throw std::out_of_range("table " + std::to_string(table) + " out of range (L = " +
                            std::to_string(params_.L) + ")");
  }
  RealKey key(params_.K);
  for (std::uint32_t j = 0; j < params_.K; ++j) {
    key[j] = hash_h(p, functions_[table * params_.K + j], params_.w);
  }
  return key;
}

CandidateSet RealLshIndex::candidates(std::span<const float> q) const {
  return collect_candidates(tables_, [&](std::size_t t) { return hash_g(t, q); });
}

QueryResult RealLshIndex::query(std::span<const float> q, std::size_t k, Metric metric) const {
  check_query(*ds_, q, k);
  CandidateSet c = candidates(q);
  QueryResult result;
  result.stats.distance_computations = c.retrieved;
  result.stats.candidates_examined = c.ids.size();
  result.neighbors = rank_candidates(*ds_, q, c.ids, k, metric);
  return result;
}

}  // namespace lshir
