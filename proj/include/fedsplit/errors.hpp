#pragma once

#include <stdexcept>
#include <string>

namespace fedsplit {

// Shape or dimension disagreement between an argument and a model/layer.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A frame could not be parsed (truncated, bad version, bad lengths).
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// AEAD tag did not verify. Kept distinct from DecodeError so callers can tell
// tampering apart from malformed input.
class AuthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A well-formed, authentic frame that violates the federation protocol
// (wrong layer, wrong shape, out-of-order seq, unexpected epoch).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Connection-level failure. The epoch that hit it may be retried from the
// last barrier.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fedsplit
