#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qshield {

enum class Errc {
  BadMagic,
  TruncatedPayload,
  TrailingBytes,
  LabelOutOfRange,
  InsufficientSamples,
  ZeroVector,
  QubitOutOfRange,
  SameQubit,
  IndexOutOfRange,
  CacheMismatch,
  ShapeMismatch,
  InvalidArgument,
  IoError,
  BadVersion,
  ChecksumMismatch,
};

std::string_view to_string(Errc code);

// Every recoverable failure in the library is reported as an Error carrying
// one of the codes above; the message adds the specifics.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

inline void require(bool condition, Errc code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace qshield
