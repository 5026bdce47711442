#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rfdae/matrix.hpp"

namespace rfdae {

struct SignalRecord {
  std::vector<float> features;  // n x m, row-major
  std::uint16_t label = 0;
  std::int16_t snr_db = 0;

  friend bool operator==(const SignalRecord&, const SignalRecord&) = default;
};

struct Dataset {
  std::size_t seq_len = 0;       // n
  std::size_t num_features = 0;  // m
  std::vector<std::string> class_names;
  std::vector<SignalRecord> records;
  std::string provenance;  // in-memory only; not part of the file format

  std::size_t num_classes() const { return class_names.size(); }
  std::size_t size() const { return records.size(); }

  // Record features widened to f64.
  Matrix features(std::size_t index) const;

  // Throws ConfigError/ShapeError if any record is inconsistent with the header fields.
  void validate() const;

  bool same_content(const Dataset& other) const {
    return seq_len == other.seq_len && num_features == other.num_features &&
           class_names == other.class_names && records == other.records;
  }
};

inline constexpr char kSigsetMagic[8] = {'S', 'I', 'G', 'S', 'E', 'T', '\0', '\0'};
inline constexpr std::uint32_t kSigsetVersion = 1;

// SIGSET little-endian layout:
//   magic "SIGSET\0\0" | u32 version | u32 n_records | u32 n | u32 m | u32 K
//   K x (u16 byte length, UTF-8 class name)
//   per record: u16 label | i16 snr_db | n*m f32 row-major
//   u32 CRC32 of all preceding bytes
std::vector<std::uint8_t> encode_sigset(const Dataset& ds);
Dataset decode_sigset(std::span<const std::uint8_t> bytes);

void dataset_write(const Dataset& ds, const std::filesystem::path& path);
Dataset dataset_read(const std::filesystem::path& path);

struct SigsetHeader {
  std::uint32_t version = 0;
  std::uint32_t n_records = 0;
  std::uint32_t seq_len = 0;
  std::uint32_t num_features = 0;
  std::vector<std::string> class_names;
};

// Parses and validates only the header (no CRC check).
SigsetHeader read_sigset_header(std::span<const std::uint8_t> bytes);

}  // namespace rfdae
