#include "qshield/errors.hpp"

namespace qshield {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::BadMagic: return "BadMagic";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::TrailingBytes: return "TrailingBytes";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::QubitOutOfRange: return "QubitOutOfRange";
    case Errc::SameQubit: return "SameQubit";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::CacheMismatch: return "CacheMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
    case Errc::BadVersion: return "BadVersion";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace qshield
