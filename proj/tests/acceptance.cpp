// Acceptance gate: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lshir/evaluation.hpp"
#include "lshir/snapshot.hpp"
#include "test_support.hpp"

using namespace lshir;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail.clear();
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string join(const std::vector<double>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + fmt(xs[i]);
  return s + "]";
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

bool non_decreasing(const std::vector<double>& xs) { return std::is_sorted(xs.begin(), xs.end()); }
bool non_increasing(const std::vector<double>& xs) {
  return std::is_sorted(xs.begin(), xs.end(), std::greater<>());
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12; }

// ---------------------------------------------------------------------------

Outcome collision_law() {
  Outcome o;
  constexpr std::uint32_t dim = 16;
  constexpr int trials = 10000;
  const double angles[] = {0.0, std::numbers::pi / 4, std::numbers::pi / 2};
  const double expected[] = {1.0, 0.75, 0.5};
  std::vector<double> observed;
  for (int a = 0; a < 3; ++a) {
    std::vector<float> u(dim, 0.0f), v(dim, 0.0f);
    u[0] = 1.0f;
    v[0] = static_cast<float>(std::cos(angles[a]));
    v[1] = static_cast<float>(std::sin(angles[a]));
    int agree = 0;
    for (int j = 0; j < trials; ++j) {
      const Hyperplane h = draw_hyperplane(2024, 0, j, dim);
      agree += hash_bit(h.normal, u) == hash_bit(h.normal, v);
    }
    observed.push_back(static_cast<double>(agree) / trials);
    o.require(std::abs(observed.back() - expected[a]) <= 0.02, "angle " + std::to_string(a) + " off");
  }
  o.detail = o.pass ? "agreement " + join(observed) + " vs [1 0.75 0.5]" : o.detail + " " + join(observed);
  return o;
}

Outcome exact_scan_oracle() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::size_t comparisons = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    const auto dim = static_cast<std::uint32_t>(1 + rng() % 16);
    const Dataset ds = lshir::testing::random_dataset(n, dim, 3, rng(), trial % 2 == 0);
    std::vector<float> q(dim);
    std::uniform_int_distribution<int> small(-2, 2);
    for (float& x : q) x = static_cast<float>(small(rng));
    for (Metric m : {Metric::cosine, Metric::euclidean}) {
      const auto full = lshir::testing::brute_force_knn(ds, q, n, m);
      for (std::size_t k = 1; k <= n + 1; ++k) {
        const auto got = knn_exact(ds, q, k, m).neighbors;
        const std::vector<Neighbor> want(full.begin(), full.begin() + std::min(k, n));
        ++comparisons;
        if (got != want) {
          o.require(false, "mismatch at trial " + std::to_string(trial) + " k=" + std::to_string(k));
          return o;
        }
      }
    }
  }
  o.detail = std::to_string(comparisons) + " (dataset, metric, k) cases identical";
  return o;
}

struct Trend {
  std::vector<double> mAP, IE, buckets, purity;
};

// Median over seeds of real-LSH reports on the held-out protocol.
Trend trend(const std::vector<std::uint32_t>& Ls, const std::vector<std::uint32_t>& Ks) {
  constexpr int seeds = 5;
  const std::size_t cells = Ls.size() * Ks.size();
  std::vector<std::vector<double>> map(cells), ie(cells), nb(cells), pur(cells);
  for (int s = 0; s < seeds; ++s) {
    const Dataset ds = generate_synthetic(50, 20, 64, 0.3, 1000 + s);
    HoldoutSplit split = split_holdout(ds, 0.25, 2000 + s);
    auto indexed = std::make_shared<const Dataset>(std::move(split.indexed));
    const auto rows = parameter_sweep(indexed, split.held_out, Ls, Ks,
                                      EvalConfig{IndexKind::real, 1, 1, 4.0, static_cast<std::uint64_t>(3000 + s)});
    for (std::size_t c = 0; c < cells; ++c) {
      map[c].push_back(rows[c].mAP);
      ie[c].push_back(rows[c].IE);
      nb[c].push_back(static_cast<double>(rows[c].buckets.num_buckets));
      pur[c].push_back(rows[c].buckets.avg_purity);
    }
  }
  Trend t;
  for (std::size_t c = 0; c < cells; ++c) {
    t.mAP.push_back(median(map[c]));
    t.IE.push_back(median(ie[c]));
    t.buckets.push_back(median(nb[c]));
    t.purity.push_back(median(pur[c]));
  }
  return t;
}

Outcome trend_in_K() {
  Outcome o;
  const Trend t = trend({7}, {1, 2, 3, 4, 5});
  o.require(non_decreasing(t.IE), "IE not non-decreasing " + join(t.IE));
  o.require(non_increasing(t.mAP), "mAP not non-increasing " + join(t.mAP));
  o.require(non_decreasing(t.buckets), "buckets not non-decreasing " + join(t.buckets));
  o.require(non_decreasing(t.purity), "purity not non-decreasing " + join(t.purity));
  if (o.pass) {
    o.detail = "K=1..5: IE " + join(t.IE) + " mAP " + join(t.mAP) + " buckets " + join(t.buckets) +
               " purity " + join(t.purity);
  }
  return o;
}

Outcome trend_in_L() {
  Outcome o;
  const Trend t = trend({1, 3, 5, 7}, {2});
  o.require(non_decreasing(t.mAP), "mAP not non-decreasing " + join(t.mAP));
  o.require(non_increasing(t.IE), "IE not non-increasing " + join(t.IE));
  if (o.pass) o.detail = "L=1,3,5,7: mAP " + join(t.mAP) + " IE " + join(t.IE);
  return o;
}

Outcome unit_examples() {
  Outcome o;
  const std::vector<std::uint64_t> rnr{1, 2, 3};
  o.require(close(average_precision(rnr, IdSet{1, 3}), 5.0 / 6.0), "AP [R,N,R]");
  o.require(close(average_precision(rnr, IdSet{1, 2}), 1.0), "AP perfect");
  o.require(close(average_precision(rnr, IdSet{9}), 0.0), "AP none");
  const std::vector<RankedQuery> pair{{{1}, {1}}, {{2}, {1}}};
  o.require(close(mean_average_precision(pair), 0.5), "mAP of 1 and 0");
  o.require(close(improvement_in_efficiency(20000, 5000), 4.0), "IE 20000/5000");
  o.require(close(improvement_in_efficiency(5000, 5000), 1.0), "IE equal costs");
  const std::vector<std::vector<std::uint32_t>> buckets{{0, 0, 1}, {2}};
  const BucketStatistics b = bucket_statistics(buckets);
  o.require(close(b.avg_purity, 5.0 / 6.0) && close(b.std_purity, 1.0 / 6.0), "bucket purity");
  o.require(b.num_buckets == 2 && b.num_items == 4 && close(b.avg_per_bucket, 2.0) && close(b.std_per_bucket, 1.0),
            "bucket sizes");
  const std::vector<double> xs{1, 2, 3}, ys{2, 4, 7}, neg{-1, -2, -3};
  o.require(close(pearson_correlation(xs, ys), 5.0 / std::sqrt(2.0 * 114.0 / 9.0)), "pearson example");
  o.require(close(pearson_correlation(xs, xs), 1.0) && close(pearson_correlation(xs, neg), -1.0), "pearson +-1");
  if (o.pass) o.detail = "AP, mAP, IE, bucket statistics and Pearson examples within 1e-12";
  return o;
}

Outcome self_retrieval() {
  Outcome o;
  std::mt19937_64 rng(6);
  int pairs = 0;
  const std::uint32_t Ls[] = {1, 3, 7}, Ks[] = {1, 4, 16};
  while (pairs < 1000) {
    auto ds = std::make_shared<const Dataset>(
        lshir::testing::random_dataset(20 + rng() % 60, 4 + rng() % 28, 5, rng(), rng() % 4 == 0));
    const std::uint32_t L = Ls[rng() % 3], K = Ks[rng() % 3];
    const std::uint64_t seed = rng();
    const RealLshIndex real = RealLshIndex::build(ds, {L, K, 0.5 + (rng() % 8), seed});
    const BinaryLshIndex bin = BinaryLshIndex::build(ds, {L, K, seed});
    for (int i = 0; i < 50; ++i, ++pairs) {
      const FeatureVector& p = (*ds)[rng() % ds->size()];
      const std::size_t k = 1 + rng() % 5;
      for (const Searcher* s : {static_cast<const Searcher*>(&real), static_cast<const Searcher*>(&bin)}) {
        const auto res = s->query(p.values, k).neighbors;
        const bool found = std::any_of(res.begin(), res.end(),
                                       [&](const Neighbor& n) { return n.id == p.id && n.distance == 0.0; });
        // Zero vectors sit at cosine distance 1 from everything, themselves included.
        const bool zero = std::all_of(p.values.begin(), p.values.end(), [](float x) { return x == 0.0f; });
        if (!found && !zero) {
          o.require(false, "point " + std::to_string(p.id) + " not returned at distance 0");
          return o;
        }
      }
    }
  }
  o.detail = std::to_string(pairs) + " pairs x 2 index kinds";
  return o;
}

Outcome determinism_and_round_trip() {
  Outcome o;
  const Dataset ds = generate_synthetic(20, 10, 16, 0.3, 8);
  HoldoutSplit split = split_holdout(ds, 0.25, 8);
  auto indexed = std::make_shared<const Dataset>(std::move(split.indexed));
  const std::vector<std::uint32_t> L{1, 3, 7}, K{1, 2, 4};
  for (IndexKind kind : {IndexKind::real, IndexKind::binary}) {
    const EvalConfig base{kind, 1, 1, 4.0, 77};
    const std::string a = sweep_csv(parameter_sweep(indexed, split.held_out, L, K, base, 1));
    const std::string b = sweep_csv(parameter_sweep(indexed, split.held_out, L, K, base, 1));
    const std::string c = sweep_csv(parameter_sweep(indexed, split.held_out, L, K, base, 3));
    o.require(a == b && a == c, "sweep CSV differs between runs");
  }

  auto full = std::make_shared<const Dataset>(ds);
  lshir::testing::TempDir dir;
  const RealLshIndex real = RealLshIndex::build(full, {5, 2, 4.0, 5});
  const BinaryLshIndex bin = BinaryLshIndex::build(full, {5, 10, 5});
  save_index(real, dir / "real.idx");
  save_index(bin, dir / "bin.idx");
  const AnyIndex real_back = load_index(dir / "real.idx", full);
  const AnyIndex bin_back = load_index(dir / "bin.idx", full);
  std::mt19937_64 rng(12);
  std::normal_distribution<float> normal;
  for (int i = 0; i < 100; ++i) {
    std::vector<float> q(16);
    for (float& x : q) x = normal(rng);
    o.require(real.query(q, 10) == as_searcher(real_back).query(q, 10), "real snapshot changes a result");
    o.require(bin.query(q, 10) == as_searcher(bin_back).query(q, 10), "binary snapshot changes a result");
    if (!o.pass) return o;
  }
  if (o.pass) o.detail = "sweep CSVs byte-identical (threads 1/3); 100 queries per kind unchanged after reload";
  return o;
}

std::vector<std::vector<double>> class_means(const Dataset& ds) {
  std::vector<std::vector<double>> means(ds.labels().size(), std::vector<double>(ds.dim(), 0.0));
  std::vector<std::size_t> counts(ds.labels().size(), 0);
  for (const FeatureVector& v : ds.vectors()) {
    ++counts[v.label_id];
    for (std::size_t i = 0; i < v.values.size(); ++i) means[v.label_id][i] += v.values[i];
  }
  for (std::size_t c = 0; c < means.size(); ++c) {
    for (double& x : means[c]) x /= static_cast<double>(counts[c]);
  }
  return means;
}

Outcome distractor_robustness() {
  Outcome o;
  constexpr double cluster_std = 0.05;
  std::vector<double> exact, real, bin;
  double min_separation = 1e300;
  for (int s = 0; s < 5; ++s) {
    const Dataset primary = generate_synthetic(10, 20, 32, cluster_std, 500 + s);
    const Dataset distractor = generate_synthetic(10, 20, 32, cluster_std, 600 + s);
    for (const auto& a : class_means(primary)) {
      for (const auto& b : class_means(distractor)) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
        min_separation = std::min(min_separation, std::sqrt(d2));
      }
    }
    auto merged = std::make_shared<const Dataset>(merge_datasets(primary, distractor));
    const auto queries = primary.vectors();
    exact.push_back(distractor_contamination(ExactScan(merged), queries, 10));
    real.push_back(distractor_contamination(RealLshIndex::build(merged, {7, 2, 4.0, 40u + s}), queries, 10));
    bin.push_back(distractor_contamination(BinaryLshIndex::build(merged, {7, 8, 40u + s}), queries, 10));
  }
  o.require(min_separation >= 10 * cluster_std, "sources not separated by 10x std");
  o.require(std::all_of(exact.begin(), exact.end(), [](double c) { return c == 0.0; }),
            "exact scan contamination " + join(exact));
  o.require(median(real) <= 0.05, "real LSH median " + fmt(median(real)));
  o.require(median(bin) <= 0.05, "binary LSH median " + fmt(median(bin)));
  if (o.pass) {
    o.detail = "separation " + fmt(min_separation / cluster_std) + "x std; exact " + join(exact) +
               "; real median " + fmt(median(real)) + "; binary median " + fmt(median(bin));
  }
  return o;
}

Outcome class_consistency() {
  Outcome o;
  auto ds = std::make_shared<const Dataset>(generate_synthetic(12, 10, 16, 1.0, 31));
  std::size_t checked = 0;
  for (IndexKind kind : {IndexKind::none, IndexKind::real, IndexKind::binary}) {
    for (const ClassReport& r : class_analysis(ds, EvalConfig{kind, 5, 3, 4.0, 17})) {
      double lo = r.query_aps.front().ap, hi = lo;
      for (const QueryAp& q : r.query_aps) {
        lo = std::min(lo, q.ap);
        hi = std::max(hi, q.ap);
      }
      // Independent pass: the first query (by id) reaching each extreme.
      std::uint64_t best = UINT64_MAX, worst = UINT64_MAX;
      for (const QueryAp& q : r.query_aps) {
        if (q.ap == hi) best = std::min(best, q.id);
        if (q.ap == lo) worst = std::min(worst, q.id);
      }
      o.require(r.min_ap <= r.mAP && r.mAP <= r.max_ap, r.class_label + " mAP outside [min, max]");
      o.require(r.range_ap == r.max_ap - r.min_ap, r.class_label + " range");
      o.require(r.min_ap == lo && r.max_ap == hi, r.class_label + " extremes");
      o.require(r.best_id == best && r.worst_id == worst, r.class_label + " best/worst id");
      ++checked;
    }
  }
  if (o.pass) o.detail = std::to_string(checked) + " class reports over exact, real and binary backends";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    double budget_s;  // 0 = no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "SimHash collision law", 5.0, collision_law},
      {2, "exact-scan oracle equivalence", 10.0, exact_scan_oracle},
      {3, "trend in K at L=7", 120.0, trend_in_K},
      {4, "trend in L at K=2", 60.0, trend_in_L},
      {5, "AP/mAP unit suite", 0.0, unit_examples},
      {6, "self-retrieval", 0.0, self_retrieval},
      {7, "determinism and round-trip", 0.0, determinism_and_round_trip},
      {8, "distractor robustness", 0.0, distractor_robustness},
      {9, "class-analysis consistency", 0.0, class_consistency},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += " (over the " + fmt(c.budget_s) + " s budget)";
    }
    failed += !o.pass;
    std::printf("[%s] %d. %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", c.number, c.name, secs, o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
