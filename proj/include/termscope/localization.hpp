#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "termscope/embedding_store.hpp"
#include "termscope/sliding_retrieval.hpp"
#include "termscope/span.hpp"
#include "termscope/wav.hpp"

namespace termscope {

// start_sec = start_frame * d, end_sec = (start_frame + len_frames) * d.
// Throws InvalidArgument for len_frames == 0.
LocatedSpan frames_to_span(std::uint32_t start_frame, std::uint32_t len_frames,
                           FrameDuration frame_duration, std::string utterance_id = {});

/// A waveform cut from an utterance, tagged with the span it came from.
struct AudioClip {
  WavData audio;
  LocatedSpan source_span;
};

// Sample index of time t: round-half-up(t * rate).
std::uint64_t sample_index(double seconds, std::uint32_t sample_rate);

// Samples [sample_index(start_sec), sample_index(end_sec)). Throws
// SpanOutOfRange when the span is negative, reversed or runs past the audio.
AudioClip slice_audio(const WavData& source, const LocatedSpan& span);

/// The located speech clip s: where it is, how well it matched, its embedding
/// rows and (when the utterance audio is known) its waveform.
struct LocatedSegment {
  LocatedSpan span;
  SimilarityResult similarity;
  EmbeddingSequence embedding;
  std::optional<AudioClip> audio;
};

// Cuts the window described by an existing similarity result.
LocatedSegment extract_window(const EmbeddingSequence& utterance, const WavData* utterance_audio,
                              const SimilarityResult& similarity, const std::string& utterance_id);

// sliding_sim, then extract_window.
LocatedSegment locate_and_extract(const EmbeddingSequence& utterance,
                                  const WavData* utterance_audio, const EmbeddingSequence& clip,
                                  const std::string& utterance_id = {});

}  // namespace termscope
