#pragma once

// Little-endian encoding helpers shared by the dataset and snapshot formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

#include "lshir/error.hpp"

namespace lshir::detail {

class ByteWriter {
 public:
  template <class T>
    requires std::is_integral_v<T>
  void put(T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<char>(static_cast<std::uint8_t>(u >> (8 * i))));
    }
  }
  void put_f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
  void put_f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void put_bytes(std::string_view bytes) { buf_.append(bytes); }

  std::string& str() noexcept { return buf_; }

 private:
  std::string buf_;
};

/// Bounds-checked reader; every short read raises FormatError with the offset.
class ByteReader {
 public:
  ByteReader(std::span<const char> bytes, std::string_view what) : bytes_(bytes), what_(what) {}

  template <class T>
    requires std::is_integral_v<T>
  T get() {
    require(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<U>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }

  std::string_view get_bytes(std::size_t n) {
    require(n);
    std::string_view out(bytes_.data() + pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == bytes_.size(); }

  [[noreturn]] void fail(const std::string& message) const {
    throw FormatError(std::string(what_) + ": " + message + " at byte offset " +
                      std::to_string(pos_));
  }

 private:
  void require(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail("truncated input (need " + std::to_string(n) + " bytes)");
  }

  std::span<const char> bytes_;
  std::string_view what_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);

/// Writes `data` to `path` via a temporary file in the same directory.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

}  // namespace lshir::detail
