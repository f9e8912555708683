#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>

#include "lshir/lsh_binary.hpp"
#include "lshir/lsh_real.hpp"

namespace lshir {

inline constexpr std::uint16_t kSnapshotVersion = 1;

enum class SnapshotKind : std::uint8_t { real = 0, binary = 1 };

using AnyIndex = std::variant<RealLshIndex, BinaryLshIndex>;

/// Binary snapshot encoding (little-endian):
///   "LSHIDX" | u16 version | u8 kind
///   params: real   -> u32 L, u32 K, f64 w, u64 seed, u32 dim
///           binary -> u32 L, u32 K, u64 seed, u32 dim
///   u64 dataset fingerprint
///   coefficients, table-major: real -> dim x f32 direction + f32 offset;
///                              binary -> dim x f32 normal
///   u64 table count, per table: u64 bucket count, per bucket:
///     u16 key length + key bytes + u64 id count + ids (u64)
/// Real keys are K little-endian i64; binary keys are one u64.
std::string encode_index(const RealLshIndex& index);
std::string encode_index(const BinaryLshIndex& index);

/// Decodes against `ds`. Throws FingerprintMismatch if the snapshot was made
/// for different data and FormatError for a bad magic, unknown version,
/// truncation, or tables that disagree with the stored functions.
AnyIndex decode_index(std::span<const char> bytes, std::shared_ptr<const Dataset> ds);

/// Writes to a temporary sibling file and renames it into place.
void save_index(const RealLshIndex& index, const std::filesystem::path& path);
void save_index(const BinaryLshIndex& index, const std::filesystem::path& path);
void save_index(const AnyIndex& index, const std::filesystem::path& path);

AnyIndex load_index(const std::filesystem::path& path, std::shared_ptr<const Dataset> ds);

const Searcher& as_searcher(const AnyIndex& index) noexcept;

}  // namespace lshir
