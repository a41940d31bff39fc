#include "termscope/wav.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "termscope/error.hpp"

namespace termscope {
namespace {

std::uint32_t le32(const std::byte* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

std::uint16_t le16(const std::byte* p) {
  return std::uint16_t(std::uint16_t(p[0]) | std::uint16_t(p[1]) << 8);
}

void put32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::byte((v >> (8 * i)) & 0xff));
}

void put16(std::vector<std::byte>& out, std::uint16_t v) {
  out.push_back(std::byte(v & 0xff));
  out.push_back(std::byte(v >> 8));
}

void put_tag(std::vector<std::byte>& out, const char* tag) {
  for (int i = 0; i < 4; ++i) out.push_back(std::byte(tag[i]));
}

bool tag_is(const std::byte* p, const char* tag) { return std::memcmp(p, tag, 4) == 0; }

}  // namespace

WavData parse_wav(std::span<const std::byte> bytes) {
  if (bytes.size() < 12) fail(ErrorCode::TruncatedData, "WAV shorter than RIFF header");
  if (!tag_is(bytes.data(), "RIFF") || !tag_is(bytes.data() + 8, "WAVE")) {
    fail(ErrorCode::UnsupportedWav, "not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  WavData wav;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::byte* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) {
      fail(ErrorCode::TruncatedData, "WAV chunk at offset " + std::to_string(pos) + " overruns file");
    }
    if (tag_is(chunk, "fmt ")) {
      if (size < 16) fail(ErrorCode::UnsupportedWav, "fmt chunk too short");
      const std::byte* f = bytes.data() + body;
      const std::uint16_t format = le16(f);
      const std::uint16_t channels = le16(f + 2);
      const std::uint16_t bits = le16(f + 14);
      if (format != 1) fail(ErrorCode::UnsupportedWav, "format " + std::to_string(format) + " is not PCM");
      if (channels != 1) {
        fail(ErrorCode::UnsupportedWav, std::to_string(channels) + " channels; only mono is accepted");
      }
      if (bits != 16) fail(ErrorCode::UnsupportedWav, std::to_string(bits) + "-bit samples; need 16");
      wav.sample_rate = le32(f + 4);
      if (wav.sample_rate == 0) fail(ErrorCode::UnsupportedWav, "sample rate 0");
      have_fmt = true;
    } else if (tag_is(chunk, "data")) {
      if (!have_fmt) fail(ErrorCode::UnsupportedWav, "data chunk before fmt chunk");
      const std::byte* d = bytes.data() + body;
      wav.samples.resize(size / 2);
      for (std::size_t i = 0; i < wav.samples.size(); ++i) {
        wav.samples[i] = std::int16_t(le16(d + 2 * i));
      }
      return wav;
    }
    pos = body + size + (size & 1);
  }
  fail(have_fmt ? ErrorCode::TruncatedData : ErrorCode::UnsupportedWav,
       have_fmt ? "WAV has no data chunk" : "WAV has no fmt chunk");
}

WavData read_wav_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_wav(std::as_bytes(std::span<const char>(raw)));
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.detail());
  }
}

std::vector<std::byte> encode_wav(const WavData& wav) {
  if (wav.sample_rate == 0) fail(ErrorCode::InvalidArgument, "sample rate 0");
  const std::uint32_t data_bytes = std::uint32_t(wav.samples.size() * 2);
  std::vector<std::byte> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, wav.sample_rate);
  put32(out, wav.sample_rate * 2);
  put16(out, 2);
  put16(out, 16);
  put_tag(out, "data");
  put32(out, data_bytes);
  for (std::int16_t s : wav.samples) put16(out, std::uint16_t(s));
  return out;
}

void write_wav_file(const WavData& wav, const std::filesystem::path& path) {
  const auto bytes = encode_wav(wav);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

}  // namespace termscope
