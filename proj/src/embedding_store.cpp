#include "termscope/embedding_store.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>

#include "termscope/error.hpp"

namespace termscope {
namespace {

constexpr std::array<char, 4> kMagic = {'S', 'E', 'M', 'B'};

void put_u32(std::byte* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[i] = std::byte((v >> (8 * i)) & 0xFFu);
}

std::uint32_t get_u32(const std::byte* in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(in[i]) << (8 * i);
  return v;
}

std::string at_offset(std::size_t offset) {
  return " (offset " + std::to_string(offset) + ")";
}

}  // namespace

FrameDuration FrameDuration::from_seconds(double seconds) {
  if (!std::isfinite(seconds) || seconds <= 0.0) {
    fail(ErrorCode::InvalidArgument, "frame duration must be positive");
  }
  const double us = std::round(seconds * 1e6);
  if (us < 1.0 || us > double(std::numeric_limits<std::uint32_t>::max())) {
    fail(ErrorCode::InvalidArgument,
         "frame duration not representable in microseconds: " + std::to_string(seconds));
  }
  return FrameDuration(static_cast<std::uint32_t>(us));
}

FrameDuration FrameDuration::from_microseconds(std::uint32_t us) {
  if (us == 0) fail(ErrorCode::InvalidArgument, "frame duration must be positive");
  return FrameDuration(us);
}

EmbeddingSequence::EmbeddingSequence(std::uint32_t dim, std::uint32_t frames,
                                     std::vector<float> data, FrameDuration frame_duration)
    : dim_(dim), frames_(frames), frame_duration_(frame_duration), data_(std::move(data)) {
  if (dim_ == 0) fail(ErrorCode::EmptySequence, "dim must be >= 1");
  if (frames_ == 0) fail(ErrorCode::EmptySequence, "frames must be >= 1");
  if (data_.size() != std::size_t(dim_) * frames_) {
    fail(ErrorCode::InvalidArgument, "data length " + std::to_string(data_.size()) +
                                         " != frames * dim = " +
                                         std::to_string(std::size_t(dim_) * frames_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      fail(ErrorCode::NonFiniteValue, "non-finite value at element " + std::to_string(i));
    }
  }
}

EmbeddingSequence EmbeddingSequence::slice_rows(std::uint32_t start, std::uint32_t len) const {
  if (len == 0 || start >= frames_ || len > frames_ - start) {
    fail(ErrorCode::WindowOutOfRange, "rows [" + std::to_string(start) + ", " +
                                          std::to_string(std::uint64_t(start) + len) +
                                          ") outside " + std::to_string(frames_) + " frames");
  }
  auto first = data_.begin() + std::ptrdiff_t(std::size_t(start) * dim_);
  return EmbeddingSequence(dim_, len,
                           std::vector<float>(first, first + std::ptrdiff_t(std::size_t(len) * dim_)),
                           frame_duration_);
}

std::uint64_t write_embeddings(const EmbeddingSequence& seq, std::ostream& sink) {
  std::array<std::byte, kSembHeaderBytes> header{};
  std::memcpy(header.data(), kMagic.data(), 4);
  put_u32(header.data() + 4, kSembVersion);
  put_u32(header.data() + 8, seq.dim());
  put_u32(header.data() + 12, seq.frames());
  put_u32(header.data() + 16, seq.frame_duration().microseconds());
  sink.write(reinterpret_cast<const char*>(header.data()), header.size());

  const auto values = seq.data();
  if constexpr (std::endian::native == std::endian::little) {
    sink.write(reinterpret_cast<const char*>(values.data()),
               std::streamsize(values.size() * sizeof(float)));
  } else {
    std::vector<std::byte> buf(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
      put_u32(buf.data() + 4 * i, std::bit_cast<std::uint32_t>(values[i]));
    }
    sink.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  }
  if (!sink) fail(ErrorCode::Io, "write to embedding sink failed");
  return kSembHeaderBytes + std::uint64_t(4) * values.size();
}

std::uint64_t write_embeddings_file(const EmbeddingSequence& seq,
                                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open for writing: " + path.string());
  const auto n = write_embeddings(seq, out);
  out.close();
  if (!out) fail(ErrorCode::Io, "failed to flush " + path.string());
  return n;
}

EmbeddingSequence read_embeddings(std::span<const std::byte> bytes) {
  if (bytes.size() < 4) fail(ErrorCode::TruncatedData, "header ends early" + at_offset(bytes.size()));
  if (std::memcmp(bytes.data(), kMagic.data(), 4) != 0) {
    fail(ErrorCode::BadMagic, "expected \"SEMB\"" + at_offset(0));
  }
  if (bytes.size() < kSembHeaderBytes) {
    fail(ErrorCode::TruncatedData, "header ends early" + at_offset(bytes.size()));
  }
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kSembVersion) {
    fail(ErrorCode::BadVersion, "unsupported version " + std::to_string(version) + at_offset(4));
  }
  const std::uint32_t dim = get_u32(bytes.data() + 8);
  const std::uint32_t frames = get_u32(bytes.data() + 12);
  const std::uint32_t fd_us = get_u32(bytes.data() + 16);
  if (dim == 0) fail(ErrorCode::BadHeader, "dim is zero" + at_offset(8));
  if (frames == 0) fail(ErrorCode::BadHeader, "frames is zero" + at_offset(12));
  if (fd_us == 0) fail(ErrorCode::BadHeader, "frame duration is zero" + at_offset(16));

  const std::uint64_t count = std::uint64_t(dim) * frames;
  const std::uint64_t expected = kSembHeaderBytes + 4 * count;
  if (bytes.size() < expected) {
    // Offset of the first float that is not fully present.
    const std::uint64_t complete = (bytes.size() - kSembHeaderBytes) / 4;
    fail(ErrorCode::TruncatedData, "payload holds " + std::to_string(complete) + " of " +
                                       std::to_string(count) + " values" +
                                       at_offset(kSembHeaderBytes + 4 * complete));
  }
  if (bytes.size() > expected) {
    fail(ErrorCode::SizeMismatch, "trailing bytes after payload" + at_offset(expected));
  }

  std::vector<float> data(count);
  const std::byte* payload = bytes.data() + kSembHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i) {
    const float v = std::bit_cast<float>(get_u32(payload + 4 * i));
    if (!std::isfinite(v)) {
      fail(ErrorCode::NonFiniteValue, "value " + std::to_string(i) + " is not finite" +
                                          at_offset(kSembHeaderBytes + 4 * i));
    }
    data[i] = v;
  }
  return EmbeddingSequence(dim, frames, std::move(data), FrameDuration::from_microseconds(fd_us));
}

EmbeddingSequence read_embeddings(std::istream& source) {
  std::vector<char> raw((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
  if (source.bad()) fail(ErrorCode::Io, "read from embedding source failed");
  return read_embeddings(std::as_bytes(std::span<const char>(raw)));
}

EmbeddingSequence read_embeddings_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  try {
    return read_embeddings(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace termscope
