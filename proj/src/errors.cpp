#include "rfdae/errors.hpp"

namespace rfdae {

const char* to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::kIo: return "io error";
    case FormatErrorKind::kBadMagic: return "bad magic";
    case FormatErrorKind::kVersionMismatch: return "version mismatch";
    case FormatErrorKind::kTruncated: return "truncated file";
    case FormatErrorKind::kShapeMismatch: return "shape/length mismatch";
    case FormatErrorKind::kChecksumMismatch: return "checksum mismatch";
    case FormatErrorKind::kInvalidValue: return "invalid value";
  }
  return "format error";
}

}  // namespace rfdae
