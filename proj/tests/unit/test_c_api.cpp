#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "termscope/termscope.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  ts_string_free(s);
  return out;
}

ts_embedding* make(std::uint32_t dim, std::uint32_t frames, const std::vector<float>& data) {
  ts_embedding* e = nullptr;
  REQUIRE(ts_embedding_create(dim, frames, data.data(), 0, &e) == TS_OK);
  return e;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(ts_status_name(TS_OK)) == "Ok");
  CHECK(std::string(ts_status_name(TS_BAD_MAGIC)) == "BadMagic");
  CHECK(std::string(ts_status_name(TS_INTERNAL)) == "Internal");
  CHECK(std::strlen(ts_version()) > 0);
}

TEST_CASE("embedding create, encode and decode") {
  ts_embedding* e = make(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(ts_embedding_dim(e) == 2);
  CHECK(ts_embedding_frames(e) == 3);
  CHECK(ts_embedding_frame_duration_us(e) == 20000);
  char* bytes = nullptr;
  std::size_t size = 0;
  REQUIRE(ts_embedding_encode(e, &bytes, &size) == TS_OK);
  CHECK(size == 44);
  ts_embedding* back = nullptr;
  REQUIRE(ts_embedding_decode(bytes, size, &back) == TS_OK);
  CHECK(std::memcmp(ts_embedding_data(back), ts_embedding_data(e), 24) == 0);

  bytes[0] = 'X';
  ts_embedding* bad = nullptr;
  CHECK(ts_embedding_decode(bytes, size, &bad) == TS_BAD_MAGIC);
  CHECK(bad == nullptr);
  CHECK(std::string(ts_last_error_message()).find("offset 0") != std::string::npos);
  CHECK(ts_embedding_decode(bytes, 10, &bad) == TS_BAD_MAGIC);
  bytes[0] = 'S';
  CHECK(ts_embedding_decode(bytes, 10, &bad) == TS_TRUNCATED_DATA);
  ts_string_free(bytes);
  ts_embedding_free(back);
  ts_embedding_free(e);

  const float nan = NAN;
  CHECK(ts_embedding_create(1, 1, &nan, 0, &bad) == TS_NON_FINITE_VALUE);
  CHECK(ts_embedding_create(1, 1, nullptr, 0, &bad) == TS_INVALID_ARGUMENT);
  CHECK(ts_embedding_read("/nonexistent.semb", &bad) == TS_IO);
}

TEST_CASE("similarity and retrieval through handles") {
  ts_embedding* u = make(2, 4, {1, 0, 0, 1, 1, 1, 0, 0});
  ts_embedding* a = make(2, 1, {0, 1});
  ts_embedding* b = make(2, 1, {1, 1});
  ts_embedding* wrong = make(3, 1, {1, 1, 1});

  ts_similarity sim{};
  REQUIRE(ts_sliding_sim(u, b, &sim) == TS_OK);
  CHECK(sim.score == doctest::Approx(1.0));
  CHECK(sim.best_window_start == 2);
  CHECK(sim.window_len == 1);
  ts_similarity naive{};
  REQUIRE(ts_sliding_sim_naive(u, b, &naive) == TS_OK);
  CHECK(naive.best_window_start == 2);
  CHECK(ts_sliding_sim(u, wrong, &sim) == TS_DIM_MISMATCH);
  ts_pooling mode;
  REQUIRE(ts_parse_pooling("whole-max", &mode) == TS_OK);
  CHECK(mode == TS_POOLING_WHOLE_MAX);
  CHECK(ts_parse_pooling("x", &mode) == TS_INVALID_ARGUMENT);
  REQUIRE(ts_baseline_sim(u, b, TS_POOLING_WHOLE_MAX, &sim) == TS_OK);
  CHECK(sim.window_len == 4);

  ts_pool_builder* builder = nullptr;
  REQUIRE(ts_pool_builder_create(&builder) == TS_OK);
  REQUIRE(ts_pool_builder_add(builder, "a", "A", "甲", a) == TS_OK);
  REQUIRE(ts_pool_builder_add(builder, "b", "B", "乙", b) == TS_OK);
  ts_pool* pool = nullptr;
  REQUIRE(ts_pool_builder_finish(builder, &pool) == TS_OK);
  CHECK(ts_pool_size(pool) == 2);
  CHECK(ts_pool_dim(pool) == 2);
  CHECK(std::string(ts_pool_triplet_translation(pool, 0)) == "甲");
  CHECK(ts_pool_triplet_id(pool, 5) == nullptr);

  ts_hit hits[4];
  std::size_t count = 0;
  REQUIRE(ts_retrieve_topk(u, pool, 5, TS_POOLING_SLIDING_MAX, 2, hits, 4, &count) == TS_OK);
  CHECK(count == 2);
  CHECK(hits[0].pool_index == 0);  // tie at 1.0, earlier entry first
  CHECK(hits[1].rank == 2);
  CHECK(ts_retrieve_topk(u, pool, 0, TS_POOLING_SLIDING_MAX, 1, hits, 4, &count) ==
        TS_INVALID_ARGUMENT);

  ts_pool_builder* empty = nullptr;
  REQUIRE(ts_pool_builder_create(&empty) == TS_OK);
  ts_pool* none = nullptr;
  REQUIRE(ts_pool_builder_finish(empty, &none) == TS_OK);
  CHECK(ts_retrieve_topk(u, none, 1, TS_POOLING_SLIDING_MAX, 1, hits, 4, &count) == TS_EMPTY_POOL);

  ts_pool_free(none);
  ts_pool_builder_free(empty);
  ts_pool_free(pool);
  ts_pool_builder_free(builder);
  for (auto* e : {u, a, b, wrong}) ts_embedding_free(e);
}

TEST_CASE("span conversion") {
  ts_span s{};
  REQUIRE(ts_frames_to_span(100, 50, 20000, &s) == TS_OK);
  CHECK(s.start_sec == doctest::Approx(2.0));
  CHECK(s.end_sec == doctest::Approx(3.0));
  CHECK(ts_frames_to_span(0, 0, 20000, &s) == TS_INVALID_ARGUMENT);
}

TEST_CASE("prompts, tags and metrics") {
  char* prompt = nullptr;
  REQUIRE(ts_build_prompt_json(
              R"({"style":"salm","items":[{"term":"NLP","audio":"n.wav","translation":"自然语言处理"}],"utterance_audio":"u.wav"})",
              &prompt) == TS_OK);
  CHECK(take(prompt).ends_with("Translation: 自然语言处理. Translate from English to Chinese: <audio>u.wav</audio>"));
  CHECK(ts_build_prompt_json(R"({"style":"salm","items":[],"utterance_audio":"u.wav"})", &prompt) == TS_EMPTY_TRIPLET_LIST);
  CHECK(ts_build_prompt_json("{", &prompt) == TS_PARSE_ERROR);

  const char* terms[] = {"NLP"};
  char* tagged = nullptr;
  REQUIRE(ts_tag_reference("The software utilizes NLP technology", terms, 1, &tagged) == TS_OK);
  const std::string t = take(tagged);
  CHECK(t == "The software utilizes <Term> NLP technology");
  CHECK(ts_tag_reference(t.c_str(), terms, 1, &tagged) == TS_ALREADY_TAGGED);
  char* stripped = nullptr;
  REQUIRE(ts_strip_tags(t.c_str(), &stripped) == TS_OK);
  CHECK(take(stripped) == "The software utilizes NLP technology");

  std::size_t d = 0;
  REQUIRE(ts_levenshtein("kitten", "sitting", &d) == TS_OK);
  CHECK(d == 3);
  int keep = -1;
  REQUIRE(ts_asr_filter("kitten", "sittingx", 3, &keep, &d) == TS_OK);
  CHECK(keep == 0);
  CHECK(d == 4);

  ts_ratio r{};
  REQUIRE(ts_hits_at_n(
              "{\"utterance_id\":\"u\",\"gold_triplet_ids\":[\"A\",\"B\"],\"ranked_ids\":[\"B\",\"C\",\"A\"]}\n",
              1, &r) == TS_OK);
  CHECK(r.value == 0.5);
  CHECK(ts_hits_at_n("", 1, &r) == TS_EMPTY_CASES);
  REQUIRE(ts_term_success_rate(
              "{\"utterance_id\":\"u\",\"hypothesis\":\"ab\",\"term_targets\":[\"a\",\"b\",\"c\"]}\n",
              &r) == TS_OK);
  CHECK(std::abs(r.value - 2.0 / 3.0) <= 1e-9);

  const double negs[] = {0.2, 0.2, 0.2, 0.2};
  double loss = 0;
  REQUIRE(ts_contrastive_loss(0.2, negs, 4, &loss) == TS_OK);
  CHECK(std::abs(loss - std::log(5.0)) <= 1e-9);
  REQUIRE(ts_contrastive_loss(0.2, nullptr, 0, &loss) == TS_OK);
  CHECK(loss == 0.0);
  double naive = 0;
  REQUIRE(ts_contrastive_loss_naive(0.2, negs, 4, &naive) == TS_OK);
  CHECK(std::abs(naive - std::log(5.0)) <= 1e-12);
  CHECK(ts_contrastive_loss(NAN, nullptr, 0, &loss) == TS_NON_FINITE_VALUE);
}

TEST_CASE("null output pointers are rejected") {
  CHECK(ts_levenshtein("a", "b", nullptr) == TS_INVALID_ARGUMENT);
  CHECK(ts_strip_tags(nullptr, nullptr) == TS_INVALID_ARGUMENT);
  CHECK(std::strlen(ts_last_error_message()) > 0);
}
