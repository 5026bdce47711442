#include "rfdae/checkpoint.hpp"

#include <cmath>
#include <cstring>

#include "rfdae/binary_io.hpp"
#include "rfdae/errors.hpp"

namespace rfdae {

std::vector<std::uint8_t> encode_checkpoint(const DaeModel& model) {
  const ModelConfig& c = model.config;
  c.validate();
  ByteWriter out;
  out.bytes(kCheckpointMagic, 8);
  out.u32(kCheckpointVersion);
  out.u32(static_cast<std::uint32_t>(c.input_features));
  out.u32(static_cast<std::uint32_t>(c.seq_len));
  out.u32(static_cast<std::uint32_t>(c.hidden));
  out.u32(static_cast<std::uint32_t>(c.encoder_depth));
  out.u32(static_cast<std::uint32_t>(c.classifier_hidden[0]));
  out.u32(static_cast<std::uint32_t>(c.classifier_hidden[1]));
  out.u32(static_cast<std::uint32_t>(c.num_classes));
  out.u32(c.final_relu ? 1u : 0u);
  out.u32(static_cast<std::uint32_t>(c.transform));
  out.f64(c.lambda);
  out.f64(c.mask_rate);
  out.f64(c.dropout_rate);
  model.for_each_tensor([&](const std::string& name, std::span<const double> v, TensorShape shape) {
    if (shape.size() != v.size()) throw ShapeError("checkpoint: tensor " + name + " size mismatch");
    out.u32(static_cast<std::uint32_t>(shape.rank));
    out.u32(static_cast<std::uint32_t>(shape.rows));
    if (shape.rank == 2) out.u32(static_cast<std::uint32_t>(shape.cols));
    for (double x : v) {
      const float f = static_cast<float>(x);
      if (!std::isfinite(f)) throw NumericError("checkpoint: tensor " + name + " not representable in f32");
      out.f32(f);
    }
  });
  out.crc_trailer();
  return out.buffer();
}

DaeModel decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes, "checkpoint");
  auto magic = in.take(8);
  if (std::memcmp(magic.data(), kCheckpointMagic, 8) != 0) {
    throw FormatError(FormatErrorKind::kBadMagic, "not an RFDAE checkpoint");
  }
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(FormatErrorKind::kVersionMismatch,
                      "checkpoint version " + std::to_string(version) + ", supported " +
                          std::to_string(kCheckpointVersion));
  }
  if (bytes.size() < in.position() + 4) {
    throw FormatError(FormatErrorKind::kTruncated, "checkpoint: no room for CRC trailer");
  }
  const std::uint32_t stored_crc = ByteReader(bytes.subspan(bytes.size() - 4), "checkpoint").u32();
  if (stored_crc != crc32(bytes.first(bytes.size() - 4))) {
    throw FormatError(FormatErrorKind::kChecksumMismatch, "checkpoint CRC32 does not match contents");
  }
  ByteReader body(bytes.first(bytes.size() - 4), "checkpoint");
  body.take(12);

  ModelConfig c;
  c.input_features = body.u32();
  c.seq_len = body.u32();
  c.hidden = body.u32();
  c.encoder_depth = body.u32();
  c.classifier_hidden[0] = body.u32();
  c.classifier_hidden[1] = body.u32();
  c.num_classes = body.u32();
  const std::uint32_t final_relu = body.u32();
  const std::uint32_t transform = body.u32();
  c.lambda = body.f64();
  c.mask_rate = body.f64();
  c.dropout_rate = body.f64();
  if (final_relu > 1 || transform > static_cast<std::uint32_t>(FeatureTransform::kAmpPhase)) {
    throw FormatError(FormatErrorKind::kInvalidValue, "checkpoint: bad flag field in config");
  }
  c.final_relu = final_relu == 1;
  c.transform = static_cast<FeatureTransform>(transform);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(FormatErrorKind::kInvalidValue, std::string("checkpoint: ") + e.what());
  }

  DaeModel model = DaeModel::zeros(c);
  model.for_each_tensor([&](const std::string& name, std::span<double> v, TensorShape shape) {
    TensorShape stored;
    stored.rank = body.u32();
    if (stored.rank != 1 && stored.rank != 2) {
      throw FormatError(FormatErrorKind::kShapeMismatch, "checkpoint: tensor " + name + " has rank " +
                                                             std::to_string(stored.rank));
    }
    stored.rows = body.u32();
    stored.cols = stored.rank == 2 ? body.u32() : 1;
    if (!(stored == shape)) {
      throw FormatError(FormatErrorKind::kShapeMismatch,
                        "checkpoint: tensor " + name + " is " + std::to_string(stored.rows) + "x" +
                            std::to_string(stored.cols) + ", config implies " +
                            std::to_string(shape.rows) + "x" + std::to_string(shape.cols));
    }
    for (double& x : v) {
      const float f = body.f32();
      if (!std::isfinite(f)) throw FormatError(FormatErrorKind::kInvalidValue, "checkpoint: non-finite weight in " + name);
      x = f;
    }
  });
  if (body.remaining() != 0) {
    throw FormatError(FormatErrorKind::kShapeMismatch,
                      "checkpoint: " + std::to_string(body.remaining()) + " unexpected trailing bytes");
  }
  return model;
}

void checkpoint_write(const DaeModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(model));
}

DaeModel checkpoint_read(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace rfdae
