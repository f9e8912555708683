#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

namespace lshir {

/// L hash tables mapping exact keys to buckets of vector ids. Ordered maps
/// keep iteration (and therefore snapshots and statistics) deterministic.
template <class Key>
class BucketTables {
 public:
  using Bucket = std::vector<std::uint64_t>;
  using Table = std::map<Key, Bucket>;

  BucketTables() = default;
  explicit BucketTables(std::size_t table_count) : tables_(table_count) {}

  void insert(std::size_t table, const Key& key, std::uint64_t id) {
    tables_.at(table)[key].push_back(id);
  }

  const Bucket* find(std::size_t table, const Key& key) const {
    const Table& t = tables_.at(table);
    auto it = t.find(key);
    return it == t.end() ? nullptr : &it->second;
  }

  std::size_t table_count() const noexcept { return tables_.size(); }
  const Table& table(std::size_t t) const { return tables_.at(t); }
  const std::vector<Table>& all() const noexcept { return tables_; }

  std::size_t bucket_count() const noexcept {
    std::size_t n = 0;
    for (const Table& t : tables_) n += t.size();
    return n;
  }

  bool operator==(const BucketTables&) const = default;

 private:
  std::vector<Table> tables_;
};

/// Ids retrieved for one query: `ids` is the sorted distinct set, `retrieved`
/// the total bucket occupancy summed over the probed tables.
struct CandidateSet {
  std::vector<std::uint64_t> ids;
  std::uint64_t retrieved = 0;
};

/// Probes table t with key_of(t) for every table and merges the buckets.
template <class Key, class KeyFn>
CandidateSet collect_candidates(const BucketTables<Key>& tables, KeyFn&& key_of) {
  CandidateSet out;
  for (std::size_t t = 0; t < tables.table_count(); ++t) {
    if (const auto* bucket = tables.find(t, key_of(t))) {
      out.retrieved += bucket->size();
      out.ids.insert(out.ids.end(), bucket->begin(), bucket->end());
    }
  }
  std::sort(out.ids.begin(), out.ids.end());
  out.ids.erase(std::unique(out.ids.begin(), out.ids.end()), out.ids.end());
  return out;
}

}  // namespace lshir
