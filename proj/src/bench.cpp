#include "termscope/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"
#include "termscope/error.hpp"
#include "termscope/sliding_retrieval.hpp"

namespace termscope {
namespace {

EmbeddingSequence random_sequence(std::mt19937_64& rng, std::uint32_t frames, std::uint32_t dim) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> data(std::size_t(frames) * dim);
  for (float& v : data) v = normal(rng);
  return EmbeddingSequence(dim, frames, std::move(data));
}

template <class Fn>
LatencyStats measure(std::size_t warmup, std::size_t iterations, Fn&& fn) {
  for (std::size_t i = 0; i < warmup; ++i) fn();
  std::vector<double> ms;
  ms.reserve(iterations);
  for (std::size_t i = 0; i < iterations; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return summarize_latency(std::move(ms));
}

nlohmann::ordered_json stats_json(const LatencyStats& s) {
  nlohmann::ordered_json j;
  j["mean_ms"] = s.mean_ms;
  j["median_ms"] = s.median_ms;
  j["p99_ms"] = s.p99_ms;
  j["iterations"] = s.iterations;
  return j;
}

// Keeps results observable so timed calls are not optimized away.
volatile double g_sink = 0.0;

}  // namespace

LatencyStats summarize_latency(std::vector<double> samples_ms) {
  LatencyStats s;
  s.iterations = samples_ms.size();
  if (samples_ms.empty()) return s;
  std::sort(samples_ms.begin(), samples_ms.end());
  const std::size_t n = samples_ms.size();
  s.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) / double(n);
  s.median_ms = n % 2 ? samples_ms[n / 2] : (samples_ms[n / 2 - 1] + samples_ms[n / 2]) / 2.0;
  const auto rank = std::size_t(std::ceil(0.99 * double(n)));
  s.p99_ms = samples_ms[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

BenchReport run_bench(const BenchOptions& o) {
  if (o.pool_size == 0 || o.frames == 0 || o.dim == 0 || o.clip_frames == 0 || o.iterations == 0) {
    fail(ErrorCode::InvalidArgument, "bench sizes and iteration count must be positive");
  }
  std::mt19937_64 rng(o.seed);
  const EmbeddingSequence u = random_sequence(rng, o.frames, o.dim);
  std::vector<KnowledgeTriplet> triplets;
  triplets.reserve(o.pool_size);
  for (std::size_t i = 0; i < o.pool_size; ++i) {
    triplets.push_back(KnowledgeTriplet{
        "t" + std::to_string(i), "term", "translation",
        std::make_shared<const EmbeddingSequence>(random_sequence(rng, o.clip_frames, o.dim)),
        std::nullopt, std::nullopt});
  }
  const KnowledgePool pool(std::move(triplets));
  const EmbeddingSequence& clip = *pool.at(0).clip;
  const std::uint32_t len = std::min(o.clip_frames, o.frames);

  const SimilarityResult fast = sliding_sim(u, clip);
  const SimilarityResult slow = sliding_sim_naive(u, clip);
  if (fast.best_window_start != slow.best_window_start || std::abs(fast.score - slow.score) > 1e-6) {
    fail(ErrorCode::Internal, "optimized and naive similarity disagree");
  }
  if (sliding_window_max(u, len, WindowMaxAlgorithm::Blocked) !=
      sliding_window_max(u, len, WindowMaxAlgorithm::MonotonicDeque)) {
    fail(ErrorCode::Internal, "window-max algorithms disagree");
  }
  const RetrieveOptions ropts{o.threads};
  if (score_pool(u, pool, PoolingMode::SlidingMax, ropts) !=
      score_pool(u, pool, PoolingMode::SlidingMax, RetrieveOptions{1})) {
    fail(ErrorCode::Internal, "pool scores depend on thread count");
  }

  BenchReport r;
  r.options = o;
  r.pair_naive = measure(o.warmup, o.iterations, [&] { g_sink = sliding_sim_naive(u, clip).score; });
  r.pair_optimized = measure(o.warmup, o.iterations, [&] { g_sink = sliding_sim(u, clip).score; });
  r.window_max_deque = measure(o.warmup, o.iterations, [&] {
    g_sink = sliding_window_max(u, len, WindowMaxAlgorithm::MonotonicDeque)[0];
  });
  r.window_max_blocked = measure(o.warmup, o.iterations, [&] {
    g_sink = sliding_window_max(u, len, WindowMaxAlgorithm::Blocked)[0];
  });
  r.pool_sliding = measure(o.warmup, o.iterations, [&] {
    g_sink = retrieve_topk(u, pool, 5, PoolingMode::SlidingMax, ropts)[0].result.score;
  });
  r.pool_whole_max = measure(o.warmup, o.iterations, [&] {
    g_sink = retrieve_topk(u, pool, 5, PoolingMode::WholeMax, ropts)[0].result.score;
  });
  r.speedup = r.pair_optimized.median_ms > 0 ? r.pair_naive.median_ms / r.pair_optimized.median_ms : 0.0;
  return r;
}

std::string bench_to_json(const BenchReport& r) {
  nlohmann::ordered_json j;
  j["pool_size"] = r.options.pool_size;
  j["frames"] = r.options.frames;
  j["dim"] = r.options.dim;
  j["clip_frames"] = r.options.clip_frames;
  j["warmup"] = r.options.warmup;
  j["iterations"] = r.options.iterations;
  j["threads"] = r.options.threads;
  j["pair_naive"] = stats_json(r.pair_naive);
  j["pair_optimized"] = stats_json(r.pair_optimized);
  j["speedup"] = r.speedup;
  j["window_max_deque"] = stats_json(r.window_max_deque);
  j["window_max_blocked"] = stats_json(r.window_max_blocked);
  j["pool_sliding_max"] = stats_json(r.pool_sliding);
  j["pool_whole_max"] = stats_json(r.pool_whole_max);
  return j.dump(2);
}

}  // namespace termscope
