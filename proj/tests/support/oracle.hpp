#pragma once

// Brute-force reference implementations used only by tests. They share no
// code with the library: plain loops, double accumulation, no pooling cache.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "termscope/embedding_store.hpp"

namespace oracle {

inline std::vector<double> column_max(const termscope::EmbeddingSequence& s, std::uint32_t start,
                                      std::uint32_t len) {
  std::vector<double> out(s.dim(), -std::numeric_limits<double>::infinity());
  for (std::uint32_t d = 0; d < s.dim(); ++d) {
    for (std::uint32_t f = start; f < start + len; ++f) {
      const double v = s.data()[std::size_t(f) * s.dim() + d];
      if (v > out[d]) out[d] = v;
    }
  }
  return out;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

struct Sliding {
  double score;
  std::uint32_t start;
  std::uint32_t len;
};

inline Sliding sliding(const termscope::EmbeddingSequence& u, const termscope::EmbeddingSequence& c) {
  const std::uint32_t len = c.frames() <= u.frames() ? c.frames() : u.frames();
  const auto cp = column_max(c, 0, c.frames());
  Sliding best{-2.0, 0, len};
  for (std::uint32_t i = 0; i + len <= u.frames(); ++i) {
    const double s = cosine(cp, column_max(u, i, len));
    if (s > best.score) best = Sliding{s, i, len};
  }
  return best;
}

}  // namespace oracle
