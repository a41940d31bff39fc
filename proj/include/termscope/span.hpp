#pragma once

#include <cstdint>
#include <string>

namespace termscope {

/// Frame- and second-indexed location of a speech clip inside an utterance.
struct LocatedSpan {
  std::uint32_t start_frame = 0;
  std::uint32_t len_frames = 1;
  double start_sec = 0.0;
  double end_sec = 0.0;
  std::string utterance_id;

  friend bool operator==(const LocatedSpan&, const LocatedSpan&) = default;
};

}  // namespace termscope
