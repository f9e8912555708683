#include "lshir/snapshot.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "byte_io.hpp"
#include "lshir/error.hpp"

namespace lshir {

namespace {

constexpr std::string_view kMagic = "LSHIDX";

void put_header(detail::ByteWriter& out, SnapshotKind kind) {
  out.put_bytes(kMagic);
  out.put(kSnapshotVersion);
  out.put(static_cast<std::uint8_t>(kind));
}

void put_key(detail::ByteWriter& out, const RealKey& key) {
  out.put(static_cast<std::uint16_t>(key.size() * sizeof(std::int64_t)));
  for (std::int64_t part : key) out.put(part);
}

void put_key(detail::ByteWriter& out, Signature key) {
  out.put(static_cast<std::uint16_t>(sizeof(Signature)));
  out.put(key);
}

template <class Key>
void put_tables(detail::ByteWriter& out, const BucketTables<Key>& tables) {
  out.put(static_cast<std::uint64_t>(tables.table_count()));
  for (const auto& table : tables.all()) {
    out.put(static_cast<std::uint64_t>(table.size()));
    for (const auto& [key, ids] : table) {
      put_key(out, key);
      out.put(static_cast<std::uint64_t>(ids.size()));
      for (std::uint64_t id : ids) out.put(id);
    }
  }
}

std::vector<float> get_floats(detail::ByteReader& in, std::size_t n) {
  std::vector<float> values(n);
  for (float& x : values) {
    x = in.get_f32();
    if (!std::isfinite(x)) in.fail("non-finite coefficient");
  }
  return values;
}

template <class Key, class KeyReader>
BucketTables<Key> get_tables(detail::ByteReader& in, std::uint32_t expected_tables,
                             std::uint16_t key_bytes, KeyReader&& read_key) {
  const auto table_count = in.get<std::uint64_t>();
  if (table_count != expected_tables) in.fail("table count does not match L");
  BucketTables<Key> tables(table_count);
  for (std::uint64_t t = 0; t < table_count; ++t) {
    const auto buckets = in.get<std::uint64_t>();
    for (std::uint64_t b = 0; b < buckets; ++b) {
      if (in.get<std::uint16_t>() != key_bytes) in.fail("unexpected key length");
      const Key key = read_key();
      const auto count = in.get<std::uint64_t>();
      if (count > in.remaining() / sizeof(std::uint64_t)) in.fail("truncated bucket");
      for (std::uint64_t i = 0; i < count; ++i) tables.insert(t, key, in.get<std::uint64_t>());
    }
  }
  return tables;
}

template <class Fn>
auto as_format_error(detail::ByteReader& in, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    in.fail(e.what());
  }
}

}  // namespace

std::string encode_index(const RealLshIndex& index) {
  const RealLshParams& p = index.params();
  if (static_cast<std::size_t>(p.K) * sizeof(std::int64_t) > std::numeric_limits<std::uint16_t>::max()) {
    throw std::invalid_argument("K too large for the snapshot key encoding");
  }
  detail::ByteWriter out;
  put_header(out, SnapshotKind::real);
  out.put(p.L);
  out.put(p.K);
  out.put_f64(p.w);
  out.put(p.seed);
  out.put(index.dim());
  out.put(fingerprint(index.dataset()));
  for (const ProjectionFunction& f : index.functions()) {
    for (float x : f.direction) out.put_f32(x);
    out.put_f32(f.offset);
  }
  put_tables(out, index.tables());
  return std::move(out.str());
}

std::string encode_index(const BinaryLshIndex& index) {
  const BinaryLshParams& p = index.params();
  detail::ByteWriter out;
  put_header(out, SnapshotKind::binary);
  out.put(p.L);
  out.put(p.K);
  out.put(p.seed);
  out.put(index.dim());
  out.put(fingerprint(index.dataset()));
  for (const Hyperplane& h : index.hyperplanes()) {
    for (float x : h.normal) out.put_f32(x);
  }
  put_tables(out, index.tables());
  return std::move(out.str());
}

AnyIndex decode_index(std::span<const char> bytes, std::shared_ptr<const Dataset> ds) {
  if (!ds) throw std::invalid_argument("null dataset");
  detail::ByteReader in(bytes, "snapshot");
  if (in.get_bytes(kMagic.size()) != kMagic) in.fail("bad magic");
  if (auto version = in.get<std::uint16_t>(); version != kSnapshotVersion) {
    in.fail("unsupported snapshot version " + std::to_string(version));
  }
  const auto kind = in.get<std::uint8_t>();
  if (kind > static_cast<std::uint8_t>(SnapshotKind::binary)) in.fail("unknown index kind");

  const auto L = in.get<std::uint32_t>();
  const auto K = in.get<std::uint32_t>();
  const double w = kind == static_cast<std::uint8_t>(SnapshotKind::real) ? in.get_f64() : 0.0;
  const auto seed = in.get<std::uint64_t>();
  const auto dim = in.get<std::uint32_t>();
  const auto stored_fingerprint = in.get<std::uint64_t>();
  if (stored_fingerprint != fingerprint(*ds)) {
    throw FingerprintMismatch("snapshot was built over a different dataset");
  }
  if (dim != ds->dim()) in.fail("dimension does not match the dataset");
  const std::uint64_t functions = static_cast<std::uint64_t>(L) * K;

  if (kind == static_cast<std::uint8_t>(SnapshotKind::real)) {
    const RealLshParams params{L, K, w, seed};
    as_format_error(in, [&] { params.validate(); return 0; });
    if (static_cast<std::uint64_t>(K) * 8 > std::numeric_limits<std::uint16_t>::max()) in.fail("K too large");
    if (functions > in.remaining() / (4ULL * (dim + 1))) in.fail("truncated coefficients");
    std::vector<ProjectionFunction> fs(functions);
    for (ProjectionFunction& f : fs) {
      f.direction = get_floats(in, dim);
      f.offset = get_floats(in, 1).front();
    }
    auto stored = get_tables<RealKey>(in, L, static_cast<std::uint16_t>(K * 8), [&] {
      RealKey key(K);
      for (std::int64_t& part : key) part = in.get<std::int64_t>();
      return key;
    });
    if (!in.at_end()) in.fail("trailing bytes");
    auto index = as_format_error(in, [&] {
      return RealLshIndex::build_with_functions(ds, params, std::move(fs));
    });
    if (!(index.tables() == stored)) in.fail("stored tables disagree with the stored functions");
    return index;
  }

  const BinaryLshParams params{L, K, seed};
  as_format_error(in, [&] { params.validate(); return 0; });
  if (functions > in.remaining() / (4ULL * dim)) in.fail("truncated coefficients");
  std::vector<Hyperplane> planes(functions);
  for (Hyperplane& h : planes) h.normal = get_floats(in, dim);
  auto stored = get_tables<Signature>(in, L, sizeof(Signature), [&] { return in.get<Signature>(); });
  if (!in.at_end()) in.fail("trailing bytes");
  auto index = as_format_error(in, [&] {
    return BinaryLshIndex::build_with_hyperplanes(ds, params, std::move(planes));
  });
  if (!(index.tables() == stored)) in.fail("stored tables disagree with the stored hyperplanes");
  return index;
}

void save_index(const RealLshIndex& index, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_index(index));
}

void save_index(const BinaryLshIndex& index, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_index(index));
}

void save_index(const AnyIndex& index, const std::filesystem::path& path) {
  std::visit([&](const auto& idx) { save_index(idx, path); }, index);
}

AnyIndex load_index(const std::filesystem::path& path, std::shared_ptr<const Dataset> ds) {
  const std::string bytes = detail::read_file(path);
  try {
    return decode_index(bytes, std::move(ds));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

const Searcher& as_searcher(const AnyIndex& index) noexcept {
  return std::visit([](const auto& idx) -> const Searcher& { return idx; }, index);
}

}  // namespace lshir
