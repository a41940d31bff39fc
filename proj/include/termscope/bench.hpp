#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace termscope {

struct BenchOptions {
  std::size_t pool_size = 1000;
  std::uint32_t frames = 1500;
  std::uint32_t dim = 512;
  std::uint32_t clip_frames = 100;
  std::size_t warmup = 10;
  std::size_t iterations = 100;
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

struct LatencyStats {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p99_ms = 0.0;  // nearest rank
  std::size_t iterations = 0;
};

LatencyStats summarize_latency(std::vector<double> samples_ms);

struct BenchReport {
  BenchOptions options;
  LatencyStats pair_naive;        // sliding_sim_naive, one (u, c) pair
  LatencyStats pair_optimized;    // sliding_sim, same pair
  LatencyStats window_max_deque;  // all windows of u, monotonic deque
  LatencyStats window_max_blocked;
  LatencyStats pool_sliding;  // retrieve_topk(k=5) over the whole pool
  LatencyStats pool_whole_max;
  double speedup = 0.0;  // pair_naive.median / pair_optimized.median
};

// Random embeddings are generated up front; only the calls are timed. Before
// timing, the optimized and naive pair results and both window-max outputs
// are checked for agreement (Internal error otherwise).
BenchReport run_bench(const BenchOptions& options);

std::string bench_to_json(const BenchReport& report);

}  // namespace termscope
