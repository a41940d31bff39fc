#include "doctest.h"
#include "json.hpp"
#include "termscope/bench.hpp"

using namespace termscope;

TEST_CASE("latency summary") {
  const auto s = summarize_latency({5.0, 1.0, 3.0, 2.0, 4.0});
  CHECK(s.iterations == 5);
  CHECK(s.mean_ms == doctest::Approx(3.0));
  CHECK(s.median_ms == doctest::Approx(3.0));
  CHECK(s.p99_ms == 5.0);
  CHECK(summarize_latency({1.0, 2.0, 3.0, 4.0}).median_ms == doctest::Approx(2.5));
  std::vector<double> hundred;
  for (int i = 1; i <= 100; ++i) hundred.push_back(i);
  CHECK(summarize_latency(hundred).p99_ms == 99.0);
  CHECK(summarize_latency({}).iterations == 0);
}

TEST_CASE("a small bench run reports every section") {
  BenchOptions o;
  o.pool_size = 20;
  o.frames = 200;
  o.dim = 32;
  o.clip_frames = 20;
  o.warmup = 1;
  o.iterations = 3;
  const auto r = run_bench(o);
  CHECK(r.pair_naive.iterations == 3);
  CHECK(r.pool_sliding.iterations == 3);
  CHECK(r.speedup > 0.0);
  const auto j = nlohmann::json::parse(bench_to_json(r));
  for (const char* key : {"pair_naive", "pair_optimized", "speedup", "window_max_deque",
                          "window_max_blocked", "pool_sliding_max", "pool_whole_max"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["pool_size"] == 20);
}
