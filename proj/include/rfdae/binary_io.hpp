#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfdae/errors.hpp"

namespace rfdae {

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

// Little-endian append-only encoder.
class ByteWriter {
 public:
  void bytes(const void* src, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(src);
    buf_.insert(buf_.end(), p, p + len);
  }
  void u16(std::uint16_t v) { put_le(v); }
  void i16(std::int16_t v) { put_le(static_cast<std::uint16_t>(v)); }
  void u32(std::uint32_t v) { put_le(v); }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_le(bits);
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_le(bits);
  }
  // Appends the CRC32 of everything written so far.
  void crc_trailer() { u32(crc32(buf_)); }

  const std::vector<std::uint8_t>& buffer() const { return buf_; }
  std::size_t size() const { return buf_.size(); }

 private:
  template <typename T>
  void put_le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked little-endian decoder; running past the end throws kTruncated.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string what) : data_(data), what_(std::move(what)) {}

  std::uint16_t u16() { return get_le<std::uint16_t>(); }
  std::int16_t i16() { return static_cast<std::int16_t>(get_le<std::uint16_t>()); }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  float f32() {
    const std::uint32_t bits = get_le<std::uint32_t>();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  double f64() {
    const std::uint64_t bits = get_le<std::uint64_t>();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t len) {
    need(len);
    auto s = data_.subspan(pos_, len);
    pos_ += len;
    return s;
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t len) {
    if (data_.size() - pos_ < len) {
      throw FormatError(FormatErrorKind::kTruncated,
                        what_ + ": expected at least " + std::to_string(pos_ + len) +
                            " bytes, file has " + std::to_string(data_.size()));
    }
  }
  template <typename T>
  T get_le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(data_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// Writes to a temporary sibling and renames on success, so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace rfdae
