#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace termscope {

inline constexpr std::uint32_t kSembVersion = 1;
inline constexpr std::size_t kSembHeaderBytes = 20;
inline constexpr std::uint32_t kDefaultFrameDurationUs = 20000;  // 0.02 s

/// Seconds per encoder frame, held as integer microseconds so that the
/// on-disk header and the in-memory value never drift apart.
class FrameDuration {
 public:
  constexpr FrameDuration() = default;
  static FrameDuration from_seconds(double seconds);
  static FrameDuration from_microseconds(std::uint32_t us);

  constexpr std::uint32_t microseconds() const noexcept { return us_; }
  constexpr double seconds() const noexcept { return us_ / 1e6; }

  friend constexpr bool operator==(FrameDuration, FrameDuration) = default;

 private:
  constexpr explicit FrameDuration(std::uint32_t us) : us_(us) {}
  std::uint32_t us_ = kDefaultFrameDurationUs;
};

/// A frames x dim matrix of encoder hidden states, row-major. Instances are
/// always valid: dim >= 1, frames >= 1, data.size() == frames * dim and every
/// value finite.
class EmbeddingSequence {
 public:
  EmbeddingSequence(std::uint32_t dim, std::uint32_t frames, std::vector<float> data,
                    FrameDuration frame_duration = {});

  std::uint32_t dim() const noexcept { return dim_; }
  std::uint32_t frames() const noexcept { return frames_; }
  FrameDuration frame_duration() const noexcept { return frame_duration_; }
  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::uint32_t frame) const noexcept {
    return std::span<const float>(data_).subspan(std::size_t(frame) * dim_, dim_);
  }

  // Rows [start, start + len) as a new sequence; throws WindowOutOfRange.
  EmbeddingSequence slice_rows(std::uint32_t start, std::uint32_t len) const;

  friend bool operator==(const EmbeddingSequence&, const EmbeddingSequence&) = default;

 private:
  std::uint32_t dim_;
  std::uint32_t frames_;
  FrameDuration frame_duration_;
  std::vector<float> data_;
};

// .semb layout: "SEMB", version, dim, frames, frame_duration_us (all u32 LE),
// then frames * dim float32 LE.
std::uint64_t write_embeddings(const EmbeddingSequence& seq, std::ostream& sink);
std::uint64_t write_embeddings_file(const EmbeddingSequence& seq,
                                    const std::filesystem::path& path);

// Errors carry the byte offset where decoding failed.
EmbeddingSequence read_embeddings(std::span<const std::byte> bytes);
EmbeddingSequence read_embeddings(std::istream& source);
EmbeddingSequence read_embeddings_file(const std::filesystem::path& path);

}  // namespace termscope
