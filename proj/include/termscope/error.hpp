#pragma once

#include <stdexcept>
#include <string>

namespace termscope {

// Values are mirrored one-to-one by ts_status in termscope.h.
enum class ErrorCode : int {
  InvalidArgument = 1,
  Io = 2,
  BadMagic = 3,
  BadVersion = 4,
  BadHeader = 5,
  TruncatedData = 6,
  SizeMismatch = 7,
  NonFiniteValue = 8,
  DimMismatch = 9,
  EmptySequence = 10,
  EmptyPool = 11,
  MissingEmbedding = 12,
  DuplicateId = 13,
  WindowOutOfRange = 14,
  SpanOutOfRange = 15,
  UnsupportedWav = 16,
  EmptyTripletList = 17,
  AlreadyTagged = 18,
  EmptyCases = 19,
  ParseError = 20,
  Internal = 21,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace termscope
