#include "termscope/sliding_retrieval.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "kernels.hpp"
#include "termscope/error.hpp"
#include "window_bank.hpp"

namespace termscope {
namespace {

void check_dims(const EmbeddingSequence& u, std::uint32_t dim) {
  if (u.dim() != dim) {
    fail(ErrorCode::DimMismatch,
         "utterance dim " + std::to_string(u.dim()) + " != clip dim " + std::to_string(dim));
  }
}

template <class Fn>
void parallel_ranges(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (workers <= 1) {
    fn(std::size_t(0), n);
    return;
  }
  const std::size_t step = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t b = std::min(n, w * step);
    const std::size_t e = std::min(n, b + step);
    if (b < e) pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(std::size_t(0), std::min(n, step));
}

struct WholePool {
  std::vector<double> values;
  double norm = 0.0;
};

WholePool whole_pool(const EmbeddingSequence& seq, PoolingMode mode) {
  PooledClip p = pool_clip(seq);
  switch (mode) {
    case PoolingMode::WholeMax: return {std::move(p.max), p.max_norm};
    case PoolingMode::WholeMin: return {std::move(p.min), p.min_norm};
    case PoolingMode::WholeAvg: return {std::move(p.avg), p.avg_norm};
    case PoolingMode::SlidingMax: break;
  }
  fail(ErrorCode::Internal, "whole_pool called with SlidingMax");
}

const std::vector<double>& pooled_for(const PooledClip& p, PoolingMode mode, double& norm) {
  switch (mode) {
    case PoolingMode::WholeMin: norm = p.min_norm; return p.min;
    case PoolingMode::WholeAvg: norm = p.avg_norm; return p.avg;
    default: norm = p.max_norm; return p.max;
  }
}

double whole_score(const std::vector<double>& clip, double clip_norm, const WholePool& u) {
  return kernels::cosine_from_dot(kernels::dot(clip.data(), u.values.data(), clip.size()), clip_norm,
                                  u.norm);
}

void window_max_blocked(const float* data, std::size_t frames, std::size_t dim, std::size_t len,
                        float* out) {
  // suffix[t] = max of frames t .. end of t's block; the prefix maximum from
  // the start of a block is carried in one running row.
  std::vector<float> suffix(frames * dim);
  for (std::size_t t = frames; t-- > 0;) {
    const float* x = data + t * dim;
    float* s = suffix.data() + t * dim;
    if ((t + 1) % len == 0 || t + 1 == frames) {
      std::copy_n(x, dim, s);
    } else {
      const float* next = s + dim;
      for (std::size_t j = 0; j < dim; ++j) s[j] = std::max(x[j], next[j]);
    }
  }
  std::vector<float> prefix(dim);
  for (std::size_t t = 0; t < frames; ++t) {
    const float* x = data + t * dim;
    if (t % len == 0) {
      std::copy_n(x, dim, prefix.data());
    } else {
      for (std::size_t j = 0; j < dim; ++j) prefix[j] = std::max(prefix[j], x[j]);
    }
    if (t + 1 >= len) {
      // Window [i, t] spans at most two blocks: suffix of i's block and the
      // prefix of t's block (identical rows when i is block-aligned).
      const std::size_t i = t + 1 - len;
      const float* s = suffix.data() + i * dim;
      float* o = out + i * dim;
      for (std::size_t j = 0; j < dim; ++j) o[j] = std::max(s[j], prefix[j]);
    }
  }
}

void window_max_deque(const float* data, std::size_t frames, std::size_t dim, std::size_t len,
                      float* out) {
  // Column j owns a ring of capacity len holding (frame, value) pairs whose
  // values never increase from front to back; the front is the earliest
  // window maximum, matching the blocked pass on equal values such as -0/+0.
  std::vector<std::uint32_t> ring_frame(dim * len);
  std::vector<float> ring_value(dim * len);
  std::vector<std::uint32_t> head(dim, 0);
  std::vector<std::uint32_t> size(dim, 0);
  const auto cap = std::uint32_t(len);
  for (std::uint32_t t = 0; t < frames; ++t) {
    const float* row = data + std::size_t(t) * dim;
    float* out_row = t + 1 >= cap ? out + std::size_t(t + 1 - cap) * dim : nullptr;
    for (std::size_t j = 0; j < dim; ++j) {
      std::uint32_t* qf = ring_frame.data() + j * len;
      float* qv = ring_value.data() + j * len;
      std::uint32_t h = head[j];
      std::uint32_t n = size[j];
      if (n > 0 && qf[h] + cap <= t) {  // front slid out of the window
        h = (h + 1 == cap) ? 0 : h + 1;
        --n;
      }
      const float v = row[j];
      while (n > 0) {
        std::uint32_t back = h + n - 1;
        if (back >= cap) back -= cap;
        if (!(qv[back] < v)) break;
        --n;
      }
      std::uint32_t slot = h + n;
      if (slot >= cap) slot -= cap;
      qf[slot] = t;
      qv[slot] = v;
      head[j] = h;
      size[j] = n + 1;
      if (out_row) out_row[j] = qv[h];
    }
  }
}

}  // namespace

const char* to_string(PoolingMode mode) noexcept {
  switch (mode) {
    case PoolingMode::SlidingMax: return "sliding-max";
    case PoolingMode::WholeMax: return "whole-max";
    case PoolingMode::WholeMin: return "whole-min";
    case PoolingMode::WholeAvg: return "whole-avg";
  }
  return "unknown";
}

PoolingMode parse_pooling_mode(std::string_view name) {
  if (name == "sliding-max" || name == "sliding") return PoolingMode::SlidingMax;
  if (name == "whole-max" || name == "max") return PoolingMode::WholeMax;
  if (name == "whole-min" || name == "min") return PoolingMode::WholeMin;
  if (name == "whole-avg" || name == "avg") return PoolingMode::WholeAvg;
  fail(ErrorCode::InvalidArgument, "unknown pooling mode \"" + std::string(name) + "\"");
}

const char* to_string(WindowMaxAlgorithm algorithm) noexcept {
  return algorithm == WindowMaxAlgorithm::Blocked ? "blocked" : "monotonic-deque";
}

std::vector<float> max_pool(const EmbeddingSequence& seq, std::uint32_t start, std::uint32_t len) {
  if (len == 0 || start >= seq.frames() || len > seq.frames() - start) {
    fail(ErrorCode::WindowOutOfRange, "window [" + std::to_string(start) + ", " +
                                          std::to_string(std::uint64_t(start) + len) +
                                          ") outside " + std::to_string(seq.frames()) + " frames");
  }
  auto first = seq.row(start);
  std::vector<float> out(first.begin(), first.end());
  for (std::uint32_t f = start + 1; f < start + len; ++f) {
    const auto row = seq.row(f);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::max(out[j], row[j]);
  }
  return out;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::DimMismatch,
         "vectors of length " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  const std::vector<double> da(a.begin(), a.end());
  const std::vector<double> db(b.begin(), b.end());
  return kernels::cosine_from_dot(kernels::dot(da.data(), db.data(), da.size()),
                                  kernels::norm(da.data(), da.size()),
                                  kernels::norm(db.data(), db.size()));
}

std::vector<float> sliding_window_max(const EmbeddingSequence& seq, std::uint32_t len,
                                      WindowMaxAlgorithm algorithm) {
  const std::uint32_t frames = seq.frames();
  if (len == 0 || len > frames) {
    fail(ErrorCode::WindowOutOfRange,
         "window length " + std::to_string(len) + " for " + std::to_string(frames) + " frames");
  }
  std::vector<float> out(std::size_t(frames - len + 1) * seq.dim());
  if (algorithm == WindowMaxAlgorithm::Blocked) {
    window_max_blocked(seq.data().data(), frames, seq.dim(), len, out.data());
  } else {
    window_max_deque(seq.data().data(), frames, seq.dim(), len, out.data());
  }
  return out;
}

SimilarityResult sliding_sim(const EmbeddingSequence& utterance, const EmbeddingSequence& clip) {
  check_dims(utterance, clip.dim());
  const PooledClip pooled = pool_clip(clip);
  const detail::WindowBank bank(utterance, std::min(clip.frames(), utterance.frames()));
  SimilarityResult result;
  detail::ClipQuery q{pooled.max.data(), pooled.max_norm, &result};
  bank.score(std::span<detail::ClipQuery>(&q, 1));
  return result;
}

SimilarityResult sliding_sim_naive(const EmbeddingSequence& utterance,
                                   const EmbeddingSequence& clip) {
  check_dims(utterance, clip.dim());
  const std::uint32_t len = std::min(clip.frames(), utterance.frames());
  const std::vector<float> clip_pool = max_pool(clip, 0, clip.frames());
  SimilarityResult best{-std::numeric_limits<double>::infinity(), 0, len};
  for (std::uint32_t i = 0; i + len <= utterance.frames(); ++i) {
    const double s = cosine(clip_pool, max_pool(utterance, i, len));
    if (s > best.score) {
      best.score = s;
      best.best_window_start = i;
    }
  }
  return best;
}

SimilarityResult baseline_sim(const EmbeddingSequence& utterance, const EmbeddingSequence& clip,
                              PoolingMode mode) {
  if (mode == PoolingMode::SlidingMax) return sliding_sim(utterance, clip);
  check_dims(utterance, clip.dim());
  const WholePool u = whole_pool(utterance, mode);
  const WholePool c = whole_pool(clip, mode);
  return SimilarityResult{whole_score(c.values, c.norm, u), 0, utterance.frames()};
}

std::vector<SimilarityResult> score_pool(const EmbeddingSequence& utterance,
                                         const KnowledgePool& pool, PoolingMode mode,
                                         const RetrieveOptions& options) {
  if (pool.empty()) fail(ErrorCode::EmptyPool, "knowledge pool has no triplets");
  check_dims(utterance, pool.dim());
  std::vector<SimilarityResult> results(pool.size());

  if (mode != PoolingMode::SlidingMax) {
    const WholePool u = whole_pool(utterance, mode);
    parallel_ranges(pool.size(), options.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        double norm = 0.0;
        const auto& c = pooled_for(pool.pooled(i), mode, norm);
        results[i] = SimilarityResult{whole_score(c, norm, u), 0, utterance.frames()};
      }
    });
    return results;
  }

  // One window bank per distinct effective window length.
  std::map<std::uint32_t, std::vector<std::size_t>> by_len;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    by_len[std::min(pool.at(i).clip->frames(), utterance.frames())].push_back(i);
  }
  for (const auto& [len, members] : by_len) {
    const detail::WindowBank bank(utterance, len);
    std::vector<detail::ClipQuery> queries;
    queries.reserve(members.size());
    for (std::size_t i : members) {
      const PooledClip& p = pool.pooled(i);
      queries.push_back(detail::ClipQuery{p.max.data(), p.max_norm, &results[i]});
    }
    parallel_ranges(queries.size(), options.threads, [&](std::size_t b, std::size_t e) {
      bank.score(std::span<detail::ClipQuery>(queries).subspan(b, e - b));
    });
  }
  return results;
}

std::vector<RetrievalHit> rank_topk(const KnowledgePool& pool,
                                    std::span<const SimilarityResult> scores, std::size_t k) {
  if (k == 0) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (scores.size() != pool.size()) fail(ErrorCode::InvalidArgument, "score count != pool size");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  const std::size_t n = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + std::ptrdiff_t(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a].score != scores[b].score) return scores[a].score > scores[b].score;
                      return a < b;
                    });
  std::vector<RetrievalHit> hits;
  hits.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = order[r];
    hits.push_back(RetrievalHit{i, pool.at(i).id, scores[i], std::uint32_t(r + 1)});
  }
  return hits;
}

std::vector<RetrievalHit> retrieve_topk(const EmbeddingSequence& utterance,
                                        const KnowledgePool& pool, std::size_t k,
                                        PoolingMode mode, const RetrieveOptions& options) {
  if (k == 0) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  const auto scores = score_pool(utterance, pool, mode, options);
  return rank_topk(pool, scores, k);
}

}  // namespace termscope
