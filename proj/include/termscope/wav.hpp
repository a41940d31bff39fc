#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace termscope {

/// 16-bit PCM mono audio.
struct WavData {
  std::uint32_t sample_rate = 16000;
  std::vector<std::int16_t> samples;

  friend bool operator==(const WavData&, const WavData&) = default;
};

// RIFF/WAVE with a PCM (format 1), 1-channel, 16-bit fmt chunk. Other chunks
// are skipped. Throws UnsupportedWav for anything else, TruncatedData for
// short files.
WavData parse_wav(std::span<const std::byte> bytes);
WavData read_wav_file(const std::filesystem::path& path);

std::vector<std::byte> encode_wav(const WavData& wav);
void write_wav_file(const WavData& wav, const std::filesystem::path& path);

}  // namespace termscope
