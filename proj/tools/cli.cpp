#include "cli.hpp"

#include <charconv>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lshir/dataset.hpp"
#include "lshir/error.hpp"
#include "lshir/evaluation.hpp"
#include "lshir/random.hpp"
#include "lshir/snapshot.hpp"

namespace lshir::cli {

namespace {

using Json = nlohmann::ordered_json;

std::shared_ptr<const Dataset> load_shared(const std::string& path) {
  return std::make_shared<const Dataset>(load_dataset(path));
}

/// Resolves the query of `query`/`scan`: either an indexed id or a literal vector.
std::vector<float> resolve_query(const Dataset& ds, const std::optional<std::uint64_t>& id,
                                 const std::string& literal) {
  if (id && !literal.empty()) throw std::invalid_argument("give either --query-id or --vector, not both");
  if (id) return ds.by_id(*id).values;
  if (literal.empty()) throw std::invalid_argument("one of --query-id or --vector is required");
  std::vector<float> values;
  std::stringstream ss(literal);
  std::string item;
  while (std::getline(ss, item, ',')) {
    float x = 0.0f;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw std::invalid_argument("invalid vector component '" + item + "'");
    }
    values.push_back(x);
  }
  return values;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path);
  f << text;
  if (!f) throw Error("write failed for " + path);
}

std::size_t depth_from_k(std::size_t k) { return k == 0 ? kAllResults : k; }

struct IndexFlags {
  std::uint32_t L = 1;
  std::uint32_t K = 1;
  double w = 4.0;
  std::optional<std::uint64_t> seed;
};

void add_index_flags(CLI::App* cmd, IndexFlags& f) {
  cmd->add_option("--L", f.L, "Number of hash tables")->check(CLI::PositiveNumber);
  cmd->add_option("--K", f.K, "Hash functions per table")->check(CLI::PositiveNumber);
  cmd->add_option("--w", f.w, "Segment width (real index)")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Random seed");
}

EvalConfig make_config(IndexKind kind, const IndexFlags& f, Metric metric, std::size_t k) {
  if (kind != IndexKind::none && !f.seed) throw std::invalid_argument("--seed is required for an LSH backend");
  return EvalConfig{kind, f.L, f.K, f.w, f.seed.value_or(0), depth_from_k(k), metric};
}

}  // namespace

std::string query_result_json(const QueryResult& result) {
  Json j;
  auto& arr = j["neighbors"] = Json::array();
  for (const Neighbor& n : result.neighbors) arr.push_back({{"id", n.id}, {"distance", n.distance}});
  j["stats"] = {{"distance_computations", result.stats.distance_computations},
                {"candidates_examined", result.stats.candidates_examined}};
  return j.dump();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LSH indexing and retrieval evaluation over labeled feature vectors", "lshir"};
  app.require_subcommand(1);

  std::string metric_name = "cosine";
  const auto metric_check = CLI::IsMember({"cosine", "euclidean"});

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic Gaussian-mixture dataset");
  std::uint32_t classes = 0, per_class = 0, dim = 0;
  double cluster_std = 0.0;
  std::uint64_t gen_seed = 0;
  std::string out_path;
  gen->add_option("--classes", classes)->required()->check(CLI::PositiveNumber);
  gen->add_option("--per-class", per_class)->required()->check(CLI::PositiveNumber);
  gen->add_option("--dim", dim)->required()->check(CLI::PositiveNumber);
  gen->add_option("--std", cluster_std)->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_seed)->required();
  gen->add_option("--out", out_path, "Output file (.csv or .fvec)")->required();

  // build
  auto* build = app.add_subcommand("build", "Build an LSH index and write a snapshot");
  std::string input_path, index_name = "real";
  IndexFlags index_flags;
  build->add_option("--input", input_path)->required();
  build->add_option("--index", index_name)->check(CLI::IsMember({"real", "binary"}));
  add_index_flags(build, index_flags);
  build->get_option("--seed")->required();
  build->add_option("--out", out_path)->required();

  // query / scan
  std::string snapshot_path, vector_literal;
  std::optional<std::uint64_t> query_id;
  std::size_t k = 10;
  auto* query = app.add_subcommand("query", "Query an index snapshot");
  query->add_option("--index", snapshot_path, "Snapshot file")->required();
  query->add_option("--input", input_path, "Dataset the snapshot was built over")->required();
  query->add_option("--query-id", query_id);
  query->add_option("--vector", vector_literal, "Comma-separated query vector");
  query->add_option("--k", k)->check(CLI::PositiveNumber);
  query->add_option("--metric", metric_name)->check(metric_check);

  auto* scan = app.add_subcommand("scan", "Exact sequential-scan k-NN");
  scan->add_option("--input", input_path)->required();
  scan->add_option("--query-id", query_id);
  scan->add_option("--vector", vector_literal);
  scan->add_option("--k", k)->check(CLI::PositiveNumber);
  scan->add_option("--metric", metric_name)->check(metric_check);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Evaluate a grid of (L, K) configurations");
  std::vector<std::uint32_t> L_values{1}, K_values{1};
  double holdout = 0.25;
  std::size_t queries_per_class = 1;
  unsigned threads = 1;
  std::optional<double> ie_target;
  std::uint64_t sweep_seed = 0;
  sweep->add_option("--input", input_path)->required();
  sweep->add_option("--index", index_name)->check(CLI::IsMember({"real", "binary", "none"}));
  sweep->add_option("--L", L_values)->delimiter(',')->check(CLI::PositiveNumber);
  sweep->add_option("--K", K_values)->delimiter(',')->check(CLI::PositiveNumber);
  sweep->add_option("--w", index_flags.w)->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sweep_seed)->required();
  sweep->add_option("--k", k, "Ranked-list depth for AP (0 = all candidates)");
  sweep->add_option("--metric", metric_name)->check(metric_check);
  sweep->add_option("--holdout", holdout, "Fraction of each class held out")->check(CLI::Range(0.0, 0.99));
  sweep->add_option("--queries-per-class", queries_per_class, "Held-out queries per class (0 = all)");
  sweep->add_option("--threads", threads, "Worker threads (0 = hardware)");
  sweep->add_option("--ie-target", ie_target, "Report the best mAP with IE >= target");
  sweep->add_option("--out", out_path, "CSV output (default stdout)");

  // stats
  auto* stats = app.add_subcommand("stats", "Bucket statistics of an index snapshot");
  stats->add_option("--index", snapshot_path)->required();
  stats->add_option("--input", input_path)->required();

  // class-analysis
  auto* classes_cmd = app.add_subcommand("class-analysis", "Per-class AP analysis");
  std::string backend_name = "exact";
  bool per_query = false;
  double class_holdout = 0.0;
  classes_cmd->add_option("--input", input_path)->required();
  classes_cmd->add_option("--backend", backend_name)->check(CLI::IsMember({"exact", "real", "binary"}));
  add_index_flags(classes_cmd, index_flags);
  classes_cmd->add_option("--k", k, "Ranked-list depth for AP (0 = all candidates)");
  classes_cmd->add_option("--metric", metric_name)->check(metric_check);
  classes_cmd->add_option("--holdout", class_holdout, "Query only a held-out fraction of each class")
      ->check(CLI::Range(0.0, 0.99));
  classes_cmd->add_flag("--per-query", per_query, "Include every query's AP");
  classes_cmd->add_option("--out", out_path, "JSON-lines output (default stdout)");

  // corr
  auto* corr = app.add_subcommand("corr", "Pearson correlation of two per-class metric files");
  std::string x_path, y_path;
  corr->add_option("--x", x_path)->required();
  corr->add_option("--y", y_path)->required();

  // contamination
  auto* contamination = app.add_subcommand("contamination", "Distractor share of top-k results");
  std::string distractor_path;
  std::size_t contamination_queries = 0;
  contamination->add_option("--input", input_path, "Primary dataset")->required();
  contamination->add_option("--distractor", distractor_path)->required();
  contamination->add_option("--index", backend_name)->check(CLI::IsMember({"exact", "real", "binary"}));
  add_index_flags(contamination, index_flags);
  contamination->add_option("--k", k)->check(CLI::PositiveNumber);
  contamination->add_option("--metric", metric_name)->check(metric_check);
  contamination->add_option("--queries-per-class", contamination_queries,
                            "Primary queries per class (0 = all)");

  // CLI11 consumes the vector from the back.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const bool k_given = [&] {
    for (auto* cmd : {sweep, classes_cmd}) {
      if (cmd->parsed()) return cmd->count("--k") > 0;
    }
    return true;
  }();
  if (!k_given) k = 0;

  try {
    const Metric metric = parse_metric(metric_name);

    if (gen->parsed()) {
      Dataset ds = generate_synthetic(classes, per_class, dim, cluster_std, gen_seed);
      save_dataset(ds, out_path);
      err << "wrote " << ds.size() << " vectors to " << out_path << "\n";
    } else if (build->parsed()) {
      auto ds = load_shared(input_path);
      if (index_name == "real") {
        save_index(RealLshIndex::build(ds, {index_flags.L, index_flags.K, index_flags.w, *index_flags.seed}),
                   out_path);
      } else {
        save_index(BinaryLshIndex::build(ds, {index_flags.L, index_flags.K, *index_flags.seed}), out_path);
      }
      err << "wrote " << index_name << " index to " << out_path << "\n";
    } else if (query->parsed()) {
      auto ds = load_shared(input_path);
      const AnyIndex index = load_index(snapshot_path, ds);
      const auto q = resolve_query(*ds, query_id, vector_literal);
      out << query_result_json(as_searcher(index).query(q, k, metric)) << "\n";
    } else if (scan->parsed()) {
      const Dataset ds = load_dataset(input_path);
      const auto q = resolve_query(ds, query_id, vector_literal);
      out << query_result_json(knn_exact(ds, q, k, metric)) << "\n";
    } else if (sweep->parsed()) {
      const Dataset ds = load_dataset(input_path);
      HoldoutSplit split = split_holdout(ds, holdout, splitmix64(sweep_seed));
      auto indexed = std::make_shared<const Dataset>(std::move(split.indexed));
      const Dataset queries =
          queries_per_class == 0 ? split.held_out : take_per_class(split.held_out, queries_per_class);
      const EvalConfig base{parse_index_kind(index_name), 1, 1, index_flags.w, sweep_seed, depth_from_k(k),
                            metric};
      const auto reports = parameter_sweep(indexed, queries, L_values, K_values, base, threads);
      write_text(out_path, sweep_csv(reports), out);
      std::uint64_t empty = 0;
      for (const EvalReport& r : reports) empty += r.empty_queries;
      if (empty > 0) err << "warning: " << empty << " queries had no candidates and were charged cost 1\n";
      if (ie_target) {
        std::ostream& summary = out_path.empty() || out_path == "-" ? err : out;
        if (auto best = best_tradeoff(reports, *ie_target)) {
          summary << "best trade-off (IE >= " << *ie_target << "): L=" << best->L << " K=" << best->K
                  << " mAP=" << best->mAP << " IE=" << best->IE << "\n";
        } else {
          summary << "no configuration reaches IE >= " << *ie_target << "\n";
        }
      }
    } else if (stats->parsed()) {
      auto ds = load_shared(input_path);
      const AnyIndex index = load_index(snapshot_path, ds);
      const BucketStatistics s = std::visit([](const auto& idx) { return bucket_statistics(idx); }, index);
      Json j;
      j["kind"] = std::holds_alternative<RealLshIndex>(index) ? "real" : "binary";
      j["avg_purity"] = s.avg_purity;
      j["std_purity"] = s.std_purity;
      j["num_buckets"] = s.num_buckets;
      j["num_items"] = s.num_items;
      j["avg_per_bucket"] = s.avg_per_bucket;
      j["std_per_bucket"] = s.std_per_bucket;
      out << j.dump() << "\n";
    } else if (classes_cmd->parsed()) {
      auto ds = load_shared(input_path);
      const EvalConfig config = make_config(parse_index_kind(backend_name), index_flags, metric, k);
      std::vector<ClassReport> reports;
      if (class_holdout > 0.0) {
        HoldoutSplit split = split_holdout(*ds, class_holdout, splitmix64(index_flags.seed.value_or(0)));
        auto indexed = std::make_shared<const Dataset>(std::move(split.indexed));
        reports = class_analysis(indexed, split.held_out, config);
      } else {
        reports = class_analysis(ds, config);
      }
      std::string text;
      for (const ClassReport& r : reports) text += class_report_json(r, per_query) + "\n";
      write_text(out_path, text, out);
    } else if (corr->parsed()) {
      const auto xs = load_class_metrics(x_path);
      const auto ys = load_class_metrics(y_path);
      Json j;
      j["pearson"] = class_metric_correlation(xs, ys);
      j["classes"] = xs.size();
      out << j.dump() << "\n";
    } else if (contamination->parsed()) {
      const Dataset primary = load_dataset(input_path);
      auto merged = std::make_shared<const Dataset>(merge_datasets(primary, load_dataset(distractor_path)));
      const EvalConfig config = make_config(parse_index_kind(backend_name), index_flags, metric, k);
      auto searcher = make_searcher(merged, config);
      const Dataset queries =
          contamination_queries == 0 ? primary : take_per_class(primary, contamination_queries);
      Json j;
      j["contamination"] = distractor_contamination(*searcher, queries.vectors(), k, metric);
      j["queries"] = queries.size();
      out << j.dump() << "\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace lshir::cli
