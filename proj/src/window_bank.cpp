#include "window_bank.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <string>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

#include "kernels.hpp"
#include "termscope/error.hpp"

namespace termscope::detail {
namespace {

constexpr std::size_t kWindowBlock = 64;  // windows per tile
constexpr std::size_t kClipChunk = 32;    // clips sharing one pass over a tile
constexpr std::size_t kSparseRatio = 16;  // sparse when changes <= entries / 16

inline void keep_best(double s, std::size_t i, double& best, std::uint32_t& best_start) {
  // Windows arrive in increasing order; strict > keeps the earliest on ties.
  if (s > best) {
    best = s;
    best_start = std::uint32_t(i);
  }
}

// Bit l is set when a[l] != b[l], for l < n <= 16.
inline std::uint32_t neq_mask(const float* a, const float* b, std::size_t n) noexcept {
#if defined(__AVX512F__)
  if (n == 16) {
    return _mm512_cmp_ps_mask(_mm512_loadu_ps(a), _mm512_loadu_ps(b), _CMP_NEQ_UQ);
  }
#endif
  std::uint32_t m = 0;
  for (std::size_t l = 0; l < n; ++l) m |= std::uint32_t(a[l] != b[l]) << l;
  return m;
}

}  // namespace

WindowBank::WindowBank(const EmbeddingSequence& utterance, std::uint32_t len, BankMode mode)
    : len_(len), dim_(utterance.dim()) {
  if (len == 0 || len > utterance.frames()) {
    fail(ErrorCode::WindowOutOfRange, "window length " + std::to_string(len) + " for " +
                                          std::to_string(utterance.frames()) + " frames");
  }
  count_ = utterance.frames() - len + 1;
  if (!build(utterance, mode != BankMode::Dense, mode == BankMode::Auto)) {
    build(utterance, false, false);
  }
}

bool WindowBank::build(const EmbeddingSequence& utterance, bool sparse, bool bounded) {
  // Streams the blocked window maximum one row at a time. Frames are split
  // into len-frame blocks; window i is max(suffix of i's block from i, prefix
  // of the next block up to i + len - 1). The suffixes of one block are held
  // in `suffix`, so memory stays at len rows instead of the full window matrix.
  const std::size_t dim = dim_;
  const std::size_t frames = utterance.frames();
  const float* data = utterance.data().data();
  std::vector<float> suffix(std::size_t(len_) * dim);
  std::vector<float> prefix(dim);
  std::vector<float> rows(2 * dim);
  const std::size_t budget = count_ * dim / kSparseRatio;

  sparse_ = sparse;
  norms_.assign(count_, 0.0);
  offsets_.clear();
  change_dim_.clear();
  change_delta_.clear();
  if (sparse) {
    offsets_.reserve(count_);
    dense_.assign(dim, 0.0);
  } else {
    dense_.assign(count_ * dim, 0.0);
  }

  for (std::size_t t = 0; t < frames; ++t) {
    const float* x = data + t * dim;
    if (t % len_ == 0) {
      std::copy_n(x, dim, prefix.data());
    } else {
      for (std::size_t j = 0; j < dim; ++j) prefix[j] = std::max(prefix[j], x[j]);
    }
    if (t + 1 < len_) continue;
    const std::size_t i = t + 1 - len_;
    const std::size_t r = i % len_;
    if (r == 0) {
      // Suffix maxima of the block starting at i; it ends at t or at the
      // last frame.
      const std::size_t n = std::min<std::size_t>(len_, frames - i);
      float* s = suffix.data();
      std::copy_n(data + (i + n - 1) * dim, dim, s + (n - 1) * dim);
      for (std::size_t k = n - 1; k-- > 0;) {
        const float* a = data + (i + k) * dim;
        const float* b = s + (k + 1) * dim;
        float* o = s + k * dim;
        for (std::size_t j = 0; j < dim; ++j) o[j] = std::max(a[j], b[j]);
      }
    }
    const float* s = suffix.data() + r * dim;
    float* cur = rows.data() + (i % 2) * dim;
    for (std::size_t j = 0; j < dim; ++j) cur[j] = std::max(s[j], prefix[j]);
    norms_[i] = kernels::norm(cur, dim);

    if (!sparse) {
      double* d = dense_.data() + i * dim;
      for (std::size_t j = 0; j < dim; ++j) d[j] = cur[j];
      continue;
    }
    if (i == 0) {
      for (std::size_t j = 0; j < dim; ++j) dense_[j] = cur[j];
      continue;
    }
    const float* prev = rows.data() + ((i + 1) % 2) * dim;
    for (std::size_t j = 0; j < dim; j += 16) {
      const std::size_t n = std::min<std::size_t>(16, dim - j);
      for (std::uint32_t m = neq_mask(cur + j, prev + j, n); m != 0; m &= m - 1) {
        const std::size_t l = j + std::size_t(std::countr_zero(m));
        change_dim_.push_back(std::uint32_t(l));
        change_delta_.push_back(double(cur[l]) - double(prev[l]));
      }
    }
    offsets_.push_back(std::uint32_t(change_dim_.size()));
    if (bounded && change_dim_.size() > budget) return false;
  }
  return true;
}

void WindowBank::score(std::span<ClipQuery> queries) const {
  if (sparse_) {
    for (ClipQuery& q : queries) score_sparse(q);
  } else {
    score_dense(queries);
  }
}

void WindowBank::score_sparse(ClipQuery& q) const {
  double dot = kernels::dot(q.pooled, dense_.data(), dim_);
  double best = kernels::cosine_from_dot(dot, q.norm, norms_[0]);
  std::uint32_t best_start = 0;
  std::size_t c = 0;
  for (std::size_t i = 1; i < count_; ++i) {
    const std::size_t end = offsets_[i - 1];
    if (c != end) {
      for (; c < end; ++c) dot += q.pooled[change_dim_[c]] * change_delta_[c];
      keep_best(kernels::cosine_from_dot(dot, q.norm, norms_[i]), i, best, best_start);
    }
    // An unchanged window repeats the previous score and cannot win a tie.
  }
  *q.out = SimilarityResult{best, best_start, len_};
}

void WindowBank::score_dense(std::span<ClipQuery> queries) const {
  for (ClipQuery& q : queries) {
    *q.out = SimilarityResult{-std::numeric_limits<double>::infinity(), 0, len_};
  }
  for (std::size_t c0 = 0; c0 < queries.size(); c0 += kClipChunk) {
    auto chunk = queries.subspan(c0, std::min(kClipChunk, queries.size() - c0));
    for (std::size_t w0 = 0; w0 < count_; w0 += kWindowBlock) {
      const std::size_t w1 = std::min(count_, w0 + kWindowBlock);
      for (ClipQuery& q : chunk) {
        double best = q.out->score;
        std::uint32_t best_start = q.out->best_window_start;
        std::size_t i = w0;
        for (; i + 4 <= w1; i += 4) {
          const double* rows[4] = {dense_row(i), dense_row(i + 1), dense_row(i + 2), dense_row(i + 3)};
          double dots[4];
          kernels::dot4(q.pooled, rows, dim_, dots);
          for (std::size_t r = 0; r < 4; ++r) {
            keep_best(kernels::cosine_from_dot(dots[r], q.norm, norms_[i + r]), i + r, best,
                      best_start);
          }
        }
        for (; i < w1; ++i) {
          keep_best(kernels::cosine_from_dot(kernels::dot(q.pooled, dense_row(i), dim_), q.norm,
                                             norms_[i]),
                    i, best, best_start);
        }
        q.out->score = best;
        q.out->best_window_start = best_start;
      }
    }
  }
}

}  // namespace termscope::detail
