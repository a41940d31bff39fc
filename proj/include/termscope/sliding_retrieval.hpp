#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "termscope/embedding_store.hpp"
#include "termscope/knowledge_base.hpp"

namespace termscope {

/// How an utterance is compared with a clip. SlidingMax is the windowed
/// method; the Whole* modes pool the entire utterance and clip with the
/// named reduction and compare once.
enum class PoolingMode { SlidingMax, WholeMax, WholeMin, WholeAvg };

const char* to_string(PoolingMode mode) noexcept;
PoolingMode parse_pooling_mode(std::string_view name);  // "sliding-max", "whole-avg", ...

struct SimilarityResult {
  double score = 0.0;                  // in [-1, 1]
  std::uint32_t best_window_start = 0;  // earliest window achieving `score`
  std::uint32_t window_len = 0;

  friend bool operator==(const SimilarityResult&, const SimilarityResult&) = default;
};

struct RetrievalHit {
  std::size_t pool_index = 0;
  std::string triplet_id;
  SimilarityResult result;
  std::uint32_t rank = 0;  // 1-based

  friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

// Component-wise maximum over rows [start, start + len). Throws WindowOutOfRange.
std::vector<float> max_pool(const EmbeddingSequence& seq, std::uint32_t start, std::uint32_t len);

// a.b / (|a||b|), or 0 when either norm is 0. Throws DimMismatch.
double cosine(std::span<const float> a, std::span<const float> b);

/// Ways to compute every window's max-pool in O(frames * dim).
/// Blocked splits the sequence into len-frame blocks and combines a suffix
/// maximum from one block with a prefix maximum from the next; every step is a
/// whole-row operation. MonotonicDeque keeps one deque of candidate frames per
/// dimension. Both produce bit-identical output.
enum class WindowMaxAlgorithm { Blocked, MonotonicDeque };

const char* to_string(WindowMaxAlgorithm algorithm) noexcept;

// Row i of the result is the max-pool of frames [i, i + len); the result is
// (frames - len + 1) x dim, row-major. Throws WindowOutOfRange.
std::vector<float> sliding_window_max(const EmbeddingSequence& seq, std::uint32_t len,
                                      WindowMaxAlgorithm algorithm = WindowMaxAlgorithm::Blocked);

// max_i cosine(MaxPool(c), MaxPool(u[i, i + |c|))). When |c| > |u| the single
// window covering all of u is used. Throws DimMismatch.
SimilarityResult sliding_sim(const EmbeddingSequence& utterance, const EmbeddingSequence& clip);

// Same result, recomputing every window's max-pool from scratch
// (O(|u| * |c| * dim)). Kept as the reference path for benchmarking.
SimilarityResult sliding_sim_naive(const EmbeddingSequence& utterance,
                                   const EmbeddingSequence& clip);

// Whole-sequence pooling baselines; SlidingMax delegates to sliding_sim.
SimilarityResult baseline_sim(const EmbeddingSequence& utterance, const EmbeddingSequence& clip,
                              PoolingMode mode);

struct RetrieveOptions {
  unsigned threads = 1;
};

// Similarity of the utterance against every pool entry, in pool order.
// Results do not depend on options.threads.
std::vector<SimilarityResult> score_pool(const EmbeddingSequence& utterance,
                                         const KnowledgePool& pool, PoolingMode mode,
                                         const RetrieveOptions& options = {});

// min(k, |pool|) hits by descending score; ties go to the earlier pool entry.
// Throws EmptyPool, DimMismatch, InvalidArgument (k == 0).
std::vector<RetrievalHit> retrieve_topk(const EmbeddingSequence& utterance,
                                        const KnowledgePool& pool, std::size_t k,
                                        PoolingMode mode = PoolingMode::SlidingMax,
                                        const RetrieveOptions& options = {});

// Top-k selection over precomputed scores.
std::vector<RetrievalHit> rank_topk(const KnowledgePool& pool,
                                    std::span<const SimilarityResult> scores, std::size_t k);

}  // namespace termscope
