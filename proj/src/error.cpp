#include "termscope/error.hpp"

namespace termscope {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadVersion: return "BadVersion";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorCode::SpanOutOfRange: return "SpanOutOfRange";
    case ErrorCode::UnsupportedWav: return "UnsupportedWav";
    case ErrorCode::EmptyTripletList: return "EmptyTripletList";
    case ErrorCode::AlreadyTagged: return "AlreadyTagged";
    case ErrorCode::EmptyCases: return "EmptyCases";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace termscope
