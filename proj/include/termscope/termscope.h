/* C interface to the termscope library. Every function returns a ts_status;
 * on failure ts_last_error_message() describes the error for the calling
 * thread until its next call into the library. Strings and buffers returned
 * through char** are owned by the caller and released with ts_string_free. */
#ifndef TERMSCOPE_TERMSCOPE_H
#define TERMSCOPE_TERMSCOPE_H

#include <stddef.h>
#include <stdint.h>

#if defined(TERMSCOPE_BUILDING_LIBRARY)
#define TS_API __attribute__((visibility("default")))
#else
#define TS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ts_status {
  TS_OK = 0,
  TS_INVALID_ARGUMENT = 1,
  TS_IO = 2,
  TS_BAD_MAGIC = 3,
  TS_BAD_VERSION = 4,
  TS_BAD_HEADER = 5,
  TS_TRUNCATED_DATA = 6,
  TS_SIZE_MISMATCH = 7,
  TS_NON_FINITE_VALUE = 8,
  TS_DIM_MISMATCH = 9,
  TS_EMPTY_SEQUENCE = 10,
  TS_EMPTY_POOL = 11,
  TS_MISSING_EMBEDDING = 12,
  TS_DUPLICATE_ID = 13,
  TS_WINDOW_OUT_OF_RANGE = 14,
  TS_SPAN_OUT_OF_RANGE = 15,
  TS_UNSUPPORTED_WAV = 16,
  TS_EMPTY_TRIPLET_LIST = 17,
  TS_ALREADY_TAGGED = 18,
  TS_EMPTY_CASES = 19,
  TS_PARSE_ERROR = 20,
  TS_INTERNAL = 21
} ts_status;

typedef enum ts_pooling {
  TS_POOLING_SLIDING_MAX = 0,
  TS_POOLING_WHOLE_MAX = 1,
  TS_POOLING_WHOLE_MIN = 2,
  TS_POOLING_WHOLE_AVG = 3
} ts_pooling;

typedef struct ts_embedding ts_embedding;
typedef struct ts_pool ts_pool;
typedef struct ts_pool_builder ts_pool_builder;

typedef struct ts_similarity {
  double score;
  uint32_t best_window_start;
  uint32_t window_len;
} ts_similarity;

typedef struct ts_hit {
  size_t pool_index;
  uint32_t rank; /* 1-based */
  ts_similarity result;
} ts_hit;

typedef struct ts_span {
  uint32_t start_frame;
  uint32_t len_frames;
  double start_sec;
  double end_sec;
} ts_span;

typedef struct ts_ratio {
  double value;
  uint64_t numerator;
  uint64_t denominator;
} ts_ratio;

typedef struct ts_bench_options {
  size_t pool_size;
  uint32_t frames;
  uint32_t dim;
  uint32_t clip_frames;
  size_t warmup;
  size_t iterations;
  uint64_t seed;
  unsigned threads;
} ts_bench_options;

TS_API const char* ts_version(void);
TS_API const char* ts_status_name(ts_status status);
TS_API const char* ts_last_error_message(void);
TS_API void ts_string_free(char* s);

/* Embeddings (.semb). frame_duration_us == 0 selects the 20000 us default. */
TS_API ts_status ts_embedding_create(uint32_t dim, uint32_t frames, const float* data,
                                     uint32_t frame_duration_us, ts_embedding** out);
TS_API ts_status ts_embedding_read(const char* path, ts_embedding** out);
TS_API ts_status ts_embedding_decode(const void* bytes, size_t size, ts_embedding** out);
TS_API ts_status ts_embedding_write(const ts_embedding* e, const char* path, uint64_t* bytes);
TS_API ts_status ts_embedding_encode(const ts_embedding* e, char** bytes, size_t* size);
TS_API uint32_t ts_embedding_dim(const ts_embedding* e);
TS_API uint32_t ts_embedding_frames(const ts_embedding* e);
TS_API uint32_t ts_embedding_frame_duration_us(const ts_embedding* e);
TS_API const float* ts_embedding_data(const ts_embedding* e);
TS_API void ts_embedding_free(ts_embedding* e);

/* Knowledge pools. The builder copies the clip embedding. */
TS_API ts_status ts_pool_builder_create(ts_pool_builder** out);
TS_API ts_status ts_pool_builder_add(ts_pool_builder* b, const char* id, const char* term,
                                     const char* translation, const ts_embedding* clip);
TS_API ts_status ts_pool_builder_finish(const ts_pool_builder* b, ts_pool** out);
TS_API void ts_pool_builder_free(ts_pool_builder* b);
/* clip_manifest may be NULL. */
TS_API ts_status ts_pool_load(const char* term_table, const char* clip_manifest, ts_pool** out);
/* Validates the table like ts_pool_load and writes it back with resolved,
 * out-relative paths. */
TS_API ts_status ts_build_kb(const char* term_table, const char* clip_manifest,
                             const char* out_path, size_t* triplets, uint32_t* dim);
TS_API size_t ts_pool_size(const ts_pool* p);
TS_API uint32_t ts_pool_dim(const ts_pool* p);
TS_API const char* ts_pool_triplet_id(const ts_pool* p, size_t index);
TS_API const char* ts_pool_triplet_term(const ts_pool* p, size_t index);
TS_API const char* ts_pool_triplet_translation(const ts_pool* p, size_t index);
TS_API void ts_pool_free(ts_pool* p);

/* Similarity and retrieval. */
TS_API ts_status ts_parse_pooling(const char* name, ts_pooling* out);
TS_API ts_status ts_sliding_sim(const ts_embedding* u, const ts_embedding* c, ts_similarity* out);
TS_API ts_status ts_sliding_sim_naive(const ts_embedding* u, const ts_embedding* c,
                                      ts_similarity* out);
TS_API ts_status ts_baseline_sim(const ts_embedding* u, const ts_embedding* c, ts_pooling mode,
                                 ts_similarity* out);
/* Writes min(k, pool size, capacity) hits; *count receives the number written. */
TS_API ts_status ts_retrieve_topk(const ts_embedding* u, const ts_pool* pool, size_t k,
                                  ts_pooling mode, unsigned threads, ts_hit* hits, size_t capacity,
                                  size_t* count);

/* Localization. utterance_wav, out_wav and out_semb may be NULL. */
TS_API ts_status ts_frames_to_span(uint32_t start_frame, uint32_t len_frames,
                                   uint32_t frame_duration_us, ts_span* out);
TS_API ts_status ts_locate(const ts_embedding* u, const ts_embedding* c, const char* utterance_wav,
                           const char* out_wav, const char* out_semb, ts_similarity* sim,
                           ts_span* span);
TS_API ts_status ts_slice_audio(const char* wav_in, double start_sec, double end_sec,
                                const char* wav_out, uint64_t* samples);

/* Prompts and tags. spec_json: {"style", "src_lang", "tgt_lang",
 * "items": [{"term", "audio", "translation"}], "utterance_audio"}. */
TS_API ts_status ts_build_prompt_json(const char* spec_json, char** prompt);
TS_API ts_status ts_tag_reference(const char* reference, const char* const* translations,
                                  size_t count, char** tagged);
TS_API ts_status ts_strip_tags(const char* text, char** stripped);

/* Metrics. Case files use the JSONL layouts of the library readers. */
TS_API ts_status ts_levenshtein(const char* a, const char* b, size_t* distance);
TS_API ts_status ts_asr_filter(const char* term, const char* transcript, size_t max_distance,
                               int* keep, size_t* distance);
TS_API ts_status ts_hits_at_n(const char* cases_jsonl, size_t n, ts_ratio* out);
TS_API ts_status ts_term_success_rate(const char* cases_jsonl, ts_ratio* out);
TS_API ts_status ts_contrastive_loss(double sim_pos, const double* sim_negs, size_t count,
                                     double* loss);
TS_API ts_status ts_contrastive_loss_naive(double sim_pos, const double* sim_negs, size_t count,
                                           double* loss);

/* Corpus run; threads == 0 keeps the config value. */
TS_API ts_status ts_run_corpus(const char* config_path, unsigned threads, char** report_json);

TS_API void ts_bench_default_options(ts_bench_options* out);
TS_API ts_status ts_bench(const ts_bench_options* options, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* TERMSCOPE_TERMSCOPE_H */
