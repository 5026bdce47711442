#include "rfdae/dataset.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>

#include "rfdae/binary_io.hpp"
#include "rfdae/errors.hpp"

namespace rfdae {

Matrix Dataset::features(std::size_t index) const {
  const SignalRecord& r = records.at(index);
  Matrix out(seq_len, num_features);
  for (std::size_t i = 0; i < r.features.size(); ++i) out.data()[i] = r.features[i];
  return out;
}

void Dataset::validate() const {
  if (seq_len == 0 || num_features == 0) throw ShapeError("dataset has zero sequence length or features");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SignalRecord& r = records[i];
    if (r.features.size() != seq_len * num_features) {
      throw ShapeError("record " + std::to_string(i) + " has " + std::to_string(r.features.size()) +
                       " values, expected " + std::to_string(seq_len * num_features));
    }
    if (r.label >= class_names.size()) {
      throw ConfigError("record " + std::to_string(i) + " label " + std::to_string(r.label) +
                        " out of range for " + std::to_string(class_names.size()) + " classes");
    }
    for (float v : r.features) {
      if (!std::isfinite(v)) throw NumericError("record " + std::to_string(i) + " has non-finite features");
    }
  }
}

namespace {

constexpr std::size_t kFixedHeaderBytes = 8 + 5 * 4;

SigsetHeader parse_header(ByteReader& in) {
  auto magic = in.take(8);
  if (std::memcmp(magic.data(), kSigsetMagic, 8) != 0) {
    throw FormatError(FormatErrorKind::kBadMagic, "not a SIGSET file");
  }
  SigsetHeader h;
  h.version = in.u32();
  if (h.version != kSigsetVersion) {
    throw FormatError(FormatErrorKind::kVersionMismatch,
                      "SIGSET version " + std::to_string(h.version) + ", supported " +
                          std::to_string(kSigsetVersion));
  }
  h.n_records = in.u32();
  h.seq_len = in.u32();
  h.num_features = in.u32();
  const std::uint32_t k = in.u32();
  if (h.seq_len == 0 || h.num_features == 0) {
    throw FormatError(FormatErrorKind::kShapeMismatch, "SIGSET header declares zero n or m");
  }
  // Each name costs at least its 2-byte length prefix; a corrupt count must not drive allocation.
  if (k > in.remaining() / 2) {
    throw FormatError(FormatErrorKind::kTruncated,
                      "SIGSET: header declares " + std::to_string(k) + " class names, only " +
                          std::to_string(in.remaining()) + " bytes follow");
  }
  h.class_names.reserve(k);
  for (std::uint32_t c = 0; c < k; ++c) {
    const std::uint16_t len = in.u16();
    auto name = in.take(len);
    h.class_names.emplace_back(reinterpret_cast<const char*>(name.data()), name.size());
  }
  return h;
}

}  // namespace

SigsetHeader read_sigset_header(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes, "SIGSET");
  return parse_header(in);
}

std::vector<std::uint8_t> encode_sigset(const Dataset& ds) {
  ds.validate();
  ByteWriter out;
  out.bytes(kSigsetMagic, 8);
  out.u32(kSigsetVersion);
  out.u32(static_cast<std::uint32_t>(ds.records.size()));
  out.u32(static_cast<std::uint32_t>(ds.seq_len));
  out.u32(static_cast<std::uint32_t>(ds.num_features));
  out.u32(static_cast<std::uint32_t>(ds.class_names.size()));
  for (const auto& name : ds.class_names) {
    if (name.size() > 0xffff) throw ConfigError("class name too long: " + name.substr(0, 32));
    out.u16(static_cast<std::uint16_t>(name.size()));
    out.bytes(name.data(), name.size());
  }
  for (const auto& r : ds.records) {
    out.u16(r.label);
    out.i16(r.snr_db);
    for (float v : r.features) out.f32(v);
  }
  out.crc_trailer();
  return out.buffer();
}

Dataset decode_sigset(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes, "SIGSET");
  SigsetHeader h = parse_header(in);

  // Computed in 128 bits so corrupt header fields cannot wrap around.
  const unsigned __int128 values = static_cast<unsigned __int128>(h.seq_len) * h.num_features;
  const unsigned __int128 expected = in.position() + (4 + 4 * values) * h.n_records + 4;
  const auto describe = [](unsigned __int128 v) {
    return v > UINT64_MAX ? std::string("over 2^64") : std::to_string(static_cast<std::uint64_t>(v));
  };
  if (expected > bytes.size()) {
    throw FormatError(FormatErrorKind::kTruncated, "SIGSET: expected " + describe(expected) +
                                                       " bytes, file has " + std::to_string(bytes.size()));
  }
  if (expected < bytes.size()) {
    throw FormatError(FormatErrorKind::kShapeMismatch, "SIGSET: header implies " + describe(expected) +
                                                           " bytes, file has " + std::to_string(bytes.size()));
  }
  const std::uint32_t stored_crc =
      ByteReader(bytes.subspan(bytes.size() - 4), "SIGSET trailer").u32();
  const std::uint32_t actual_crc = crc32(bytes.first(bytes.size() - 4));
  if (stored_crc != actual_crc) {
    throw FormatError(FormatErrorKind::kChecksumMismatch, "SIGSET CRC32 does not match contents");
  }

  Dataset ds;
  ds.seq_len = h.seq_len;
  ds.num_features = h.num_features;
  ds.class_names = std::move(h.class_names);
  ds.records.resize(h.n_records);
  for (auto& r : ds.records) {
    r.label = in.u16();
    r.snr_db = in.i16();
    if (r.label >= ds.class_names.size()) {
      throw FormatError(FormatErrorKind::kInvalidValue,
                        "SIGSET record label " + std::to_string(r.label) + " >= K=" +
                            std::to_string(ds.class_names.size()));
    }
    r.features.resize(static_cast<std::size_t>(values));
    for (float& v : r.features) {
      v = in.f32();
      if (!std::isfinite(v)) throw FormatError(FormatErrorKind::kInvalidValue, "SIGSET non-finite feature");
    }
  }
  return ds;
}

void dataset_write(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, encode_sigset(ds));
}

Dataset dataset_read(const std::filesystem::path& path) {
  Dataset ds = decode_sigset(read_file_bytes(path));
  ds.provenance = "sigset:" + path.string();
  return ds;
}

}  // namespace rfdae
