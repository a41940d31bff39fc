#include <cstring>
#include <random>

#include "doctest.h"
#include "scratch.hpp"
#include "synthetic.hpp"
#include "termscope/error.hpp"
#include "termscope/localization.hpp"
#include "termscope/wav.hpp"

using namespace termscope;

namespace {

WavData ramp(std::size_t n, std::uint32_t rate = 16000) {
  WavData w;
  w.sample_rate = rate;
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(std::int16_t(i % 30000 - 15000));
  return w;
}

ErrorCode wav_code(const std::vector<std::byte>& bytes) {
  try {
    parse_wav(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

void put_u16(std::vector<std::byte>& b, std::size_t off, std::uint16_t v) {
  b[off] = std::byte(v & 0xff);
  b[off + 1] = std::byte(v >> 8);
}

}  // namespace

TEST_CASE("frames (100, 50) at 0.02 s map to [2, 3] s") {
  const auto s = frames_to_span(100, 50, FrameDuration::from_seconds(0.02), "u1");
  CHECK(s.start_frame == 100);
  CHECK(s.len_frames == 50);
  CHECK(s.start_sec == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.end_sec == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.utterance_id == "u1");
  CHECK_THROWS_AS(frames_to_span(0, 0, FrameDuration{}), Error);
}

TEST_CASE("sample index rounds half up") {
  CHECK(sample_index(1.0, 16000) == 16000);
  CHECK(sample_index(0.00003125, 16000) == 1);   // 0.5 samples
  CHECK(sample_index(0.00003, 16000) == 0);      // 0.48 samples
  CHECK(sample_index(0.0, 16000) == 0);
}

TEST_CASE("slicing") {
  const auto wav = ramp(48000);
  LocatedSpan whole{0, 150, 0.0, 3.0, "u"};
  CHECK(slice_audio(wav, whole).audio == wav);

  LocatedSpan one{50, 50, 1.0, 2.0, "u"};
  const auto clip = slice_audio(wav, one);
  REQUIRE(clip.audio.samples.size() == 16000);
  CHECK(clip.audio.samples.front() == wav.samples[16000]);
  CHECK(clip.audio.sample_rate == 16000);
  CHECK(clip.source_span == one);

  auto code = [&](double a, double b) {
    try {
      slice_audio(wav, LocatedSpan{0, 1, a, b, "u"});
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  CHECK(code(-0.1, 1.0) == ErrorCode::SpanOutOfRange);
  CHECK(code(2.0, 1.0) == ErrorCode::SpanOutOfRange);
  CHECK(code(2.5, 3.5) == ErrorCode::SpanOutOfRange);
}

TEST_CASE("wav round trip") {
  const auto dir = scratch_dir("wav");
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    WavData w;
    w.sample_rate = 8000 + std::uint32_t(rng() % 40000);
    w.samples.resize(rng() % 5000);
    for (auto& s : w.samples) s = std::int16_t(rng());
    const auto bytes = encode_wav(w);
    CHECK(bytes.size() == 44 + 2 * w.samples.size());
    CHECK(parse_wav(bytes) == w);
  }
  const auto w = ramp(100);
  write_wav_file(w, dir / "a.wav");
  CHECK(read_wav_file(dir / "a.wav") == w);
}

TEST_CASE("unknown chunks are skipped") {
  const auto w = ramp(10);
  auto bytes = encode_wav(w);
  // Insert a LIST chunk between fmt and data.
  const char list[] = {'L', 'I', 'S', 'T', 4, 0, 0, 0, 'a', 'b', 'c', 'd'};
  std::vector<std::byte> extra(12);
  std::memcpy(extra.data(), list, 12);
  bytes.insert(bytes.begin() + 36, extra.begin(), extra.end());
  CHECK(parse_wav(bytes) == w);
}

TEST_CASE("unsupported and truncated wavs") {
  const auto good = encode_wav(ramp(10));
  auto not_riff = good;
  not_riff[0] = std::byte('X');
  CHECK(wav_code(not_riff) == ErrorCode::UnsupportedWav);
  auto float_fmt = good;
  put_u16(float_fmt, 20, 3);
  CHECK(wav_code(float_fmt) == ErrorCode::UnsupportedWav);
  auto stereo = good;
  put_u16(stereo, 22, 2);
  CHECK(wav_code(stereo) == ErrorCode::UnsupportedWav);
  auto bits8 = good;
  put_u16(bits8, 34, 8);
  CHECK(wav_code(bits8) == ErrorCode::UnsupportedWav);
  CHECK(wav_code(std::vector<std::byte>(good.begin(), good.begin() + 8)) == ErrorCode::TruncatedData);
  CHECK(wav_code(std::vector<std::byte>(good.begin(), good.end() - 4)) == ErrorCode::TruncatedData);
}

TEST_CASE("locate_and_extract finds a clip planted at frame 40") {
  std::mt19937_64 rng(6);
  auto u = synthetic::random_sequence(rng, 200, 24, -1.0f);
  const auto c = synthetic::make_planted(rng, 50, 24, 25).clip;
  std::vector<float> data(u.data().begin(), u.data().end());
  std::copy(c.data().begin(), c.data().end(), data.begin() + 40 * 24);
  u = EmbeddingSequence(24, 200, data);
  const auto wav = ramp(200 * 320);

  const auto seg = locate_and_extract(u, &wav, c, "utt");
  CHECK(seg.span.start_frame == 40);
  CHECK(seg.span.len_frames == 25);
  CHECK(seg.span.start_sec == doctest::Approx(0.80));
  CHECK(seg.span.end_sec == doctest::Approx(1.30));
  CHECK(seg.span.utterance_id == "utt");
  CHECK(seg.similarity.score == doctest::Approx(1.0));
  CHECK(seg.embedding == c);
  REQUIRE(seg.audio);
  CHECK(seg.audio->audio.samples.size() == 25 * 320);
  CHECK(seg.audio->audio.samples.front() == wav.samples[40 * 320]);

  const auto no_audio = locate_and_extract(u, nullptr, c);
  CHECK(!no_audio.audio);
  CHECK(no_audio.span == frames_to_span(40, 25, FrameDuration{}));
}

TEST_CASE("a clip longer than the utterance yields the whole utterance") {
  std::mt19937_64 rng(2);
  const auto u = synthetic::random_sequence(rng, 10, 4);
  const auto c = synthetic::random_sequence(rng, 40, 4);
  const auto seg = locate_and_extract(u, nullptr, c);
  CHECK(seg.span.start_frame == 0);
  CHECK(seg.span.len_frames == 10);
  CHECK(seg.embedding == u);
}
