#include "termscope/localization.hpp"

#include <cmath>

#include "termscope/error.hpp"

namespace termscope {

LocatedSpan frames_to_span(std::uint32_t start_frame, std::uint32_t len_frames,
                           FrameDuration frame_duration, std::string utterance_id) {
  if (len_frames == 0) fail(ErrorCode::InvalidArgument, "span of zero frames");
  const double us = frame_duration.microseconds();
  LocatedSpan span;
  span.start_frame = start_frame;
  span.len_frames = len_frames;
  span.start_sec = double(start_frame) * us / 1e6;
  span.end_sec = (double(start_frame) + double(len_frames)) * us / 1e6;
  span.utterance_id = std::move(utterance_id);
  return span;
}

std::uint64_t sample_index(double seconds, std::uint32_t sample_rate) {
  return std::uint64_t(std::floor(seconds * double(sample_rate) + 0.5));
}

AudioClip slice_audio(const WavData& source, const LocatedSpan& span) {
  if (!(span.start_sec >= 0.0) || !(span.end_sec >= span.start_sec)) {
    fail(ErrorCode::SpanOutOfRange, "span [" + std::to_string(span.start_sec) + ", " +
                                        std::to_string(span.end_sec) + ") is not a valid interval");
  }
  const std::uint64_t b = sample_index(span.start_sec, source.sample_rate);
  const std::uint64_t e = sample_index(span.end_sec, source.sample_rate);
  if (e > source.samples.size()) {
    fail(ErrorCode::SpanOutOfRange, "span ends at sample " + std::to_string(e) + " but audio has " +
                                        std::to_string(source.samples.size()));
  }
  AudioClip clip;
  clip.audio.sample_rate = source.sample_rate;
  clip.audio.samples.assign(source.samples.begin() + std::ptrdiff_t(b),
                            source.samples.begin() + std::ptrdiff_t(e));
  clip.source_span = span;
  return clip;
}

LocatedSegment extract_window(const EmbeddingSequence& utterance, const WavData* utterance_audio,
                              const SimilarityResult& similarity, const std::string& utterance_id) {
  LocatedSpan span = frames_to_span(similarity.best_window_start, similarity.window_len,
                                    utterance.frame_duration(), utterance_id);
  EmbeddingSequence rows = utterance.slice_rows(span.start_frame, span.len_frames);
  std::optional<AudioClip> audio;
  if (utterance_audio) audio = slice_audio(*utterance_audio, span);
  return LocatedSegment{std::move(span), similarity, std::move(rows), std::move(audio)};
}

LocatedSegment locate_and_extract(const EmbeddingSequence& utterance,
                                  const WavData* utterance_audio, const EmbeddingSequence& clip,
                                  const std::string& utterance_id) {
  return extract_window(utterance, utterance_audio, sliding_sim(utterance, clip), utterance_id);
}

}  // namespace termscope
