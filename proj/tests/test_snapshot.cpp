#include <gtest/gtest.h>

#include <fstream>

#include "lshir/error.hpp"
#include "lshir/snapshot.hpp"
#include "test_support.hpp"

using namespace lshir;
using lshir::testing::TempDir;

namespace {

std::shared_ptr<const Dataset> sample(std::uint64_t seed = 1) {
  return std::make_shared<const Dataset>(generate_synthetic(6, 20, 12, 0.4, seed));
}

std::vector<std::vector<float>> random_queries(std::size_t n, std::uint32_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal;
  std::vector<std::vector<float>> qs(n, std::vector<float>(dim));
  for (auto& q : qs) {
    for (float& x : q) x = normal(rng);
  }
  return qs;
}

void expect_same_answers(const Searcher& a, const Searcher& b, std::uint32_t dim) {
  for (const auto& q : random_queries(100, dim, 77)) {
    const QueryResult ra = a.query(q, 10), rb = b.query(q, 10);
    ASSERT_EQ(ra.neighbors.size(), rb.neighbors.size());
    for (std::size_t i = 0; i < ra.neighbors.size(); ++i) {
      EXPECT_EQ(ra.neighbors[i].id, rb.neighbors[i].id);
      EXPECT_EQ(ra.neighbors[i].distance, rb.neighbors[i].distance);
    }
    EXPECT_EQ(ra.stats.distance_computations, rb.stats.distance_computations);
    EXPECT_EQ(ra.stats.candidates_examined, rb.stats.candidates_examined);
  }
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

AnyIndex decode(const std::string& bytes, std::shared_ptr<const Dataset> ds) {
  return decode_index(std::span<const char>(bytes.data(), bytes.size()), std::move(ds));
}

}  // namespace

TEST(Snapshot, RealRoundTripAnswersIdentically) {
  TempDir dir;
  auto ds = sample();
  const RealLshIndex index = RealLshIndex::build(ds, {5, 3, 2.5, 42});
  save_index(index, dir / "real.idx");
  const AnyIndex loaded = load_index(dir / "real.idx", ds);
  ASSERT_TRUE(std::holds_alternative<RealLshIndex>(loaded));
  const auto& back = std::get<RealLshIndex>(loaded);
  EXPECT_EQ(back.params().L, 5u);
  EXPECT_EQ(back.params().K, 3u);
  EXPECT_EQ(back.params().w, 2.5);
  EXPECT_EQ(back.params().seed, 42u);
  EXPECT_EQ(back.functions(), index.functions());
  EXPECT_EQ(back.tables(), index.tables());
  expect_same_answers(index, as_searcher(loaded), ds->dim());
  EXPECT_EQ(encode_index(back), encode_index(index));
}

TEST(Snapshot, BinaryRoundTripAnswersIdentically) {
  TempDir dir;
  auto ds = sample();
  const BinaryLshIndex index = BinaryLshIndex::build(ds, {4, 9, 7});
  save_index(index, dir / "bin.idx");
  const AnyIndex loaded = load_index(dir / "bin.idx", ds);
  ASSERT_TRUE(std::holds_alternative<BinaryLshIndex>(loaded));
  EXPECT_EQ(std::get<BinaryLshIndex>(loaded).tables(), index.tables());
  expect_same_answers(index, as_searcher(loaded), ds->dim());
}

TEST(Snapshot, SixtyFourBitSignaturesSurvive) {
  auto ds = sample();
  const BinaryLshIndex index = BinaryLshIndex::build(ds, {2, 64, 3});
  const AnyIndex loaded = decode(encode_index(index), ds);
  const auto& back = std::get<BinaryLshIndex>(loaded);
  for (const FeatureVector& v : ds->vectors()) {
    for (std::uint32_t t = 0; t < 2; ++t) EXPECT_EQ(back.signature(t, v.values), index.signature(t, v.values));
  }
  EXPECT_EQ(back.tables(), index.tables());
}

TEST(Snapshot, HeaderLayout) {
  auto ds = sample();
  const std::string bytes = encode_index(RealLshIndex::build(ds, {2, 3, 4.0, 9}));
  ASSERT_GT(bytes.size(), 9u);
  EXPECT_EQ(bytes.substr(0, 6), "LSHIDX");
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), kSnapshotVersion & 0xff);
  EXPECT_EQ(static_cast<unsigned char>(bytes[7]), kSnapshotVersion >> 8);
  EXPECT_EQ(bytes[8], 0);
  EXPECT_EQ(encode_index(BinaryLshIndex::build(ds, {1, 1, 9}))[8], 1);
}

TEST(Snapshot, DifferentDatasetIsRejected) {
  auto ds = sample(1);
  const std::string bytes = encode_index(RealLshIndex::build(ds, {2, 2, 4.0, 1}));
  EXPECT_THROW(decode(bytes, sample(2)), FingerprintMismatch);
  // A single changed coordinate changes the fingerprint too.
  std::vector<FeatureVector> vs = ds->vectors();
  vs[5].values[3] += 1.0f;
  auto tweaked = std::make_shared<const Dataset>(Dataset(ds->dim(), ds->labels(), vs));
  EXPECT_THROW(decode(bytes, tweaked), FingerprintMismatch);
}

TEST(Snapshot, CorruptionIsDetected) {
  auto ds = sample();
  const std::string good = encode_index(BinaryLshIndex::build(ds, {3, 6, 5}));
  EXPECT_NO_THROW(decode(good, ds));

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode(bad_magic, ds), FormatError);

  std::string bad_version = good;
  bad_version[6] = 2;
  EXPECT_THROW(decode(bad_version, ds), FormatError);

  std::string bad_kind = good;
  bad_kind[8] = 7;
  EXPECT_THROW(decode(bad_kind, ds), FormatError);

  for (std::size_t cut : {std::size_t{3}, std::size_t{20}, good.size() / 2, good.size() - 1}) {
    EXPECT_THROW(decode(good.substr(0, cut), ds), FormatError) << "cut at " << cut;
  }
  EXPECT_THROW(decode(good + "x", ds), FormatError);

  // Flip an id in the last bucket: tables no longer match the functions.
  std::string bad_tables = good;
  bad_tables[bad_tables.size() - 8] ^= 0x01;
  EXPECT_THROW(decode(bad_tables, ds), FormatError);
}

TEST(Snapshot, AtomicWriteLeavesNoTemporaries) {
  TempDir dir;
  auto ds = sample();
  save_index(RealLshIndex::build(ds, {1, 1, 4.0, 1}), dir / "a.idx");
  const AnyIndex second = BinaryLshIndex::build(ds, {1, 2, 1});
  save_index(second, dir / "a.idx");
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
    ++files;
    EXPECT_EQ(entry.path().filename(), "a.idx");
  }
  EXPECT_EQ(files, 1u);
  EXPECT_EQ(slurp(dir / "a.idx"), encode_index(std::get<BinaryLshIndex>(second)));
}

TEST(Snapshot, MissingFileIsAnError) {
  TempDir dir;
  EXPECT_THROW(load_index(dir / "nope.idx", sample()), Error);
}
