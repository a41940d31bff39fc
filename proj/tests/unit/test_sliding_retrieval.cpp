#include <cmath>
#include <random>

#include "doctest.h"
#include "kernels.hpp"
#include "oracle.hpp"
#include "synthetic.hpp"
#include "termscope/error.hpp"
#include "termscope/sliding_retrieval.hpp"
#include "window_bank.hpp"

using namespace termscope;

namespace {

std::shared_ptr<const EmbeddingSequence> share(EmbeddingSequence s) {
  return std::make_shared<const EmbeddingSequence>(std::move(s));
}

KnowledgeTriplet triplet(const std::string& id, std::shared_ptr<const EmbeddingSequence> clip) {
  return KnowledgeTriplet{id, "t" + id, "y" + id, std::move(clip), std::nullopt, std::nullopt};
}

// Windows recomputed one by one from max_pool.
std::vector<float> recomputed_windows(const EmbeddingSequence& s, std::uint32_t len) {
  std::vector<float> out;
  for (std::uint32_t i = 0; i + len <= s.frames(); ++i) {
    const auto p = max_pool(s, i, len);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

bool same_bits(const std::vector<float>& a, const std::vector<float>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::signbit(a[i]) != std::signbit(b[i]) || !(a[i] == b[i])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("max_pool and cosine examples") {
  const EmbeddingSequence s(2, 3, {1, 5, 3, 2, 0, 4});
  CHECK(max_pool(s, 0, 3) == std::vector<float>{3, 5});
  CHECK(max_pool(s, 1, 2) == std::vector<float>{3, 4});
  CHECK_THROWS_AS(max_pool(s, 2, 2), Error);
  CHECK_THROWS_AS(max_pool(s, 0, 0), Error);

  const std::vector<float> a{1, 0}, b{0, 1}, c{2, 0}, z{0, 0};
  CHECK(cosine(a, b) == 0.0);
  CHECK(cosine(a, c) == doctest::Approx(1.0));
  CHECK(cosine(a, z) == 0.0);
  CHECK_THROWS_AS(cosine(a, std::vector<float>{1, 2, 3}), Error);
}

TEST_CASE("sliding_sim agrees with the brute-force oracle") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 300; ++t) {
    const std::uint32_t dim = 1 + rng() % 16;
    const std::uint32_t uf = 1 + rng() % 64;
    const std::uint32_t cf = 1 + rng() % 80;  // sometimes longer than u
    const auto u = synthetic::random_sequence(rng, uf, dim);
    const auto c = synthetic::random_sequence(rng, cf, dim);
    const auto want = oracle::sliding(u, c);
    const auto got = sliding_sim(u, c);
    const auto naive = sliding_sim_naive(u, c);
    CHECK(got.best_window_start == want.start);
    CHECK(got.window_len == want.len);
    CHECK(std::abs(got.score - want.score) <= 1e-6);
    CHECK(naive.best_window_start == want.start);
    CHECK(std::abs(naive.score - want.score) <= 1e-6);
  }
}

TEST_CASE("planted clip at frame 40 scores 1") {
  std::mt19937_64 rng(9);
  auto u = synthetic::random_sequence(rng, 200, 32, -1.0f);
  const auto c = synthetic::make_planted(rng, 60, 32, 30).clip;
  std::vector<float> data(u.data().begin(), u.data().end());
  std::copy(c.data().begin(), c.data().end(), data.begin() + 40 * 32);
  u = EmbeddingSequence(32, 200, data);
  const auto r = sliding_sim(u, c);
  CHECK(r.best_window_start == 40);
  CHECK(r.window_len == 30);
  CHECK(r.score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equal lengths give one window; longer clips clamp to the utterance") {
  std::mt19937_64 rng(4);
  const auto u = synthetic::random_sequence(rng, 12, 8);
  const auto c = synthetic::random_sequence(rng, 12, 8);
  const auto r = sliding_sim(u, c);
  CHECK(r.best_window_start == 0);
  CHECK(r.window_len == 12);
  CHECK(r.score == doctest::Approx(oracle::cosine(oracle::column_max(c, 0, 12),
                                                  oracle::column_max(u, 0, 12))));

  const auto long_clip = synthetic::random_sequence(rng, 30, 8);
  const auto clamped = sliding_sim(u, long_clip);
  CHECK(clamped.best_window_start == 0);
  CHECK(clamped.window_len == 12);
  CHECK(clamped.score == doctest::Approx(oracle::cosine(oracle::column_max(long_clip, 0, 30),
                                                        oracle::column_max(u, 0, 12))));
}

TEST_CASE("ties go to the earliest window") {
  // Frames 0 and 2 are identical; a one-frame clip equal to them ties.
  const EmbeddingSequence u(2, 4, {1, 0, 0, 1, 1, 0, 0, 1});
  const EmbeddingSequence c(2, 1, {1, 0});
  const auto r = sliding_sim(u, c);
  CHECK(r.best_window_start == 0);
  CHECK(r.score == 1.0);
  CHECK(sliding_sim_naive(u, c).best_window_start == 0);

  const EmbeddingSequence flat(3, 10, std::vector<float>(30, 2.0f));
  const EmbeddingSequence probe(3, 4, std::vector<float>(12, 1.0f));
  CHECK(sliding_sim(flat, probe) == SimilarityResult{1.0, 0, 4});
}

TEST_CASE("zero vectors score 0") {
  const EmbeddingSequence u(2, 3, std::vector<float>(6, 0.0f));
  const EmbeddingSequence c(2, 2, {1, 1, 2, 2});
  CHECK(sliding_sim(u, c).score == 0.0);
  CHECK(baseline_sim(u, c, PoolingMode::WholeAvg).score == 0.0);
}

TEST_CASE("dimension mismatch is rejected") {
  const EmbeddingSequence u(2, 3, std::vector<float>(6, 1.0f));
  const EmbeddingSequence c(3, 2, std::vector<float>(6, 1.0f));
  try {
    sliding_sim(u, c);
    FAIL("expected DimMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimMismatch);
  }
  CHECK_THROWS_AS(baseline_sim(u, c, PoolingMode::WholeMax), Error);
}

TEST_CASE("whole-sequence baselines") {
  const EmbeddingSequence u(2, 3, {1, -1, -2, 3, 0, 0});
  const EmbeddingSequence c(2, 2, {1, 3, 0, 0});
  // WholeMax: u -> (1, 3), c -> (1, 3).
  const auto mx = baseline_sim(u, c, PoolingMode::WholeMax);
  CHECK(mx.score == doctest::Approx(1.0));
  CHECK(mx.best_window_start == 0);
  CHECK(mx.window_len == 3);
  // WholeMin: u -> (-2, -1), c -> (0, 0).
  CHECK(baseline_sim(u, c, PoolingMode::WholeMin).score == 0.0);
  // WholeAvg: u -> (-1/3, 2/3), c -> (1/2, 3/2).
  const double avg = (-1.0 / 6 + 1.0) / (std::sqrt(5.0 / 9) * std::sqrt(10.0 / 4));
  CHECK(baseline_sim(u, c, PoolingMode::WholeAvg).score == doctest::Approx(avg));
  CHECK(baseline_sim(u, c, PoolingMode::SlidingMax) == sliding_sim(u, c));
}

TEST_CASE("pooling mode names") {
  for (auto m : {PoolingMode::SlidingMax, PoolingMode::WholeMax, PoolingMode::WholeMin,
                 PoolingMode::WholeAvg}) {
    CHECK(parse_pooling_mode(to_string(m)) == m);
  }
  CHECK(std::string(to_string(PoolingMode::SlidingMax)) == "sliding-max");
  CHECK_THROWS_AS(parse_pooling_mode("median"), Error);
}

TEST_CASE("similarity is scale invariant and self-similarity is 1") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 30; ++t) {
    const auto u = synthetic::random_sequence(rng, 50, 12);
    const auto c = synthetic::random_sequence(rng, 1 + rng() % 20, 12);
    std::vector<float> scaled(c.data().begin(), c.data().end());
    for (float& v : scaled) v *= 4.0f;  // exact in binary floating point
    const EmbeddingSequence c4(12, c.frames(), scaled);
    const auto a = sliding_sim(u, c);
    const auto b = sliding_sim(u, c4);
    CHECK(a.best_window_start == b.best_window_start);
    CHECK(a.score == doctest::Approx(b.score).epsilon(1e-12));
    CHECK(sliding_sim(u, u).score == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("window max algorithms equal recomputed pooling") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 200; ++t) {
    const std::uint32_t dim = 1 + rng() % 20;
    const std::uint32_t frames = 1 + rng() % 90;
    const std::uint32_t len = 1 + rng() % frames;
    std::vector<float> data(std::size_t(dim) * frames);
    std::uniform_int_distribution<int> small(-3, 3);
    std::normal_distribution<float> g;
    const bool ties = t % 2 == 0;
    for (float& v : data) v = ties ? float(small(rng)) : g(rng);
    if (ties) {
      for (std::size_t i = 0; i < data.size(); i += 5) data[i] = (i / 5) % 2 ? 0.0f : -0.0f;
    }
    const EmbeddingSequence s(dim, frames, data);
    const auto want = recomputed_windows(s, len);
    CHECK(same_bits(sliding_window_max(s, len, WindowMaxAlgorithm::Blocked), want));
    CHECK(same_bits(sliding_window_max(s, len, WindowMaxAlgorithm::MonotonicDeque), want));
  }
  const EmbeddingSequence s(1, 3, {1, 2, 3});
  CHECK_THROWS_AS(sliding_window_max(s, 4), Error);
  CHECK_THROWS_AS(sliding_window_max(s, 0), Error);
  CHECK(std::string(to_string(WindowMaxAlgorithm::MonotonicDeque)) == "monotonic-deque");
}

TEST_CASE("window bank modes agree") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 60; ++t) {
    const std::uint32_t dim = 1 + rng() % 40;
    const auto u = synthetic::random_sequence(rng, 20 + rng() % 200, dim);
    const std::uint32_t len = 1 + rng() % u.frames();
    std::vector<PooledClip> clips;
    for (int k = 0; k < 5; ++k) clips.push_back(pool_clip(synthetic::random_sequence(rng, len, dim)));
    auto run = [&](detail::BankMode mode) {
      const detail::WindowBank bank(u, len, mode);
      std::vector<SimilarityResult> out(clips.size());
      std::vector<detail::ClipQuery> q;
      for (std::size_t k = 0; k < clips.size(); ++k) {
        q.push_back({clips[k].max.data(), clips[k].max_norm, &out[k]});
      }
      bank.score(q);
      return out;
    };
    const auto dense = run(detail::BankMode::Dense);
    const auto sparse = run(detail::BankMode::Sparse);
    const auto autom = run(detail::BankMode::Auto);
    for (std::size_t k = 0; k < clips.size(); ++k) {
      CHECK(dense[k].best_window_start == sparse[k].best_window_start);
      CHECK(std::abs(dense[k].score - sparse[k].score) <= 1e-9);
      CHECK(std::abs(dense[k].score - autom[k].score) <= 1e-9);
    }
  }
  const EmbeddingSequence u(1, 3, {1, 2, 3});
  CHECK_THROWS_AS(detail::WindowBank(u, 4), Error);
}

TEST_CASE("dot and dot4 are bit-identical per row") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (std::size_t n : {1u, 7u, 8u, 9u, 64u, 513u}) {
    std::vector<double> a(n), r[4];
    for (auto& v : a) v = g(rng);
    for (auto& row : r) {
      row.resize(n);
      for (auto& v : row) v = g(rng);
    }
    const double* rows[4] = {r[0].data(), r[1].data(), r[2].data(), r[3].data()};
    double out[4];
    kernels::dot4(a.data(), rows, n, out);
    for (int k = 0; k < 4; ++k) CHECK(out[k] == kernels::dot(a.data(), rows[k], n));
  }
}

TEST_CASE("top-k ordering, ties and bounds") {
  const auto u = share(EmbeddingSequence(2, 4, {1, 0, 0, 1, 1, 1, 0, 0}));
  KnowledgePool pool({
      triplet("a", share(EmbeddingSequence(2, 1, {0, 1}))),
      triplet("b", share(EmbeddingSequence(2, 1, {1, 0}))),
      triplet("c", share(EmbeddingSequence(2, 1, {0, 1}))),
      triplet("d", share(EmbeddingSequence(2, 1, {-1, -1}))),
  });
  const auto hits = retrieve_topk(*u, pool, 3);
  REQUIRE(hits.size() == 3);
  // All three leaders score exactly 1; insertion order breaks the tie.
  CHECK(hits[0].triplet_id == "a");
  CHECK(hits[1].triplet_id == "b");
  CHECK(hits[2].triplet_id == "c");
  CHECK(hits[0].rank == 1);
  CHECK(hits[2].rank == 3);
  CHECK(hits[0].result.best_window_start == 1);
  CHECK(hits[1].result.best_window_start == 0);

  const auto all = retrieve_topk(*u, pool, 100);
  REQUIRE(all.size() == 4);
  CHECK(all[3].triplet_id == "d");
  CHECK_THROWS_AS(retrieve_topk(*u, pool, 0), Error);
  try {
    retrieve_topk(*u, KnowledgePool(), 1);
    FAIL("expected EmptyPool");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyPool);
  }
}

TEST_CASE("pool scoring matches pairwise scoring at every thread count") {
  const auto bench = synthetic::make_planted_benchmark(3, 4, 300, 16, 60, 10, 40);
  for (const auto& c : bench.cases) {
    std::vector<SimilarityResult> pairwise;
    for (const auto& t : bench.pool.triplets()) pairwise.push_back(sliding_sim(c.utterance, *t.clip));
    for (unsigned threads : {1u, 2u, 3u, 8u}) {
      const auto scores = score_pool(c.utterance, bench.pool, PoolingMode::SlidingMax, {threads});
      CHECK(scores == pairwise);
      const auto avg = score_pool(c.utterance, bench.pool, PoolingMode::WholeAvg, {threads});
      CHECK(avg == score_pool(c.utterance, bench.pool, PoolingMode::WholeAvg, {1}));
    }
  }
}

TEST_CASE("planted benchmark ranks the gold clip first at its exact start") {
  const auto bench = synthetic::make_planted_benchmark(12, 10, 600, 32, 100, 30, 80);
  for (std::size_t i = 0; i < bench.cases.size(); ++i) {
    const auto hits = retrieve_topk(bench.cases[i].utterance, bench.pool, 5);
    CHECK(hits[0].triplet_id == bench.gold_ids[i]);
    CHECK(hits[0].result.best_window_start == bench.cases[i].start);
  }
}
