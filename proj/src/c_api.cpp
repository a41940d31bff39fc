#include "termscope/termscope.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "termscope/bench.hpp"
#include "termscope/embedding_store.hpp"
#include "termscope/error.hpp"
#include "termscope/knowledge_base.hpp"
#include "termscope/localization.hpp"
#include "termscope/manifest.hpp"
#include "termscope/metrics.hpp"
#include "termscope/pipeline.hpp"
#include "termscope/prompt_builder.hpp"
#include "termscope/sliding_retrieval.hpp"
#include "termscope/wav.hpp"

struct ts_embedding {
  termscope::EmbeddingSequence seq;
};

struct ts_pool {
  termscope::KnowledgePool pool;
};

struct ts_pool_builder {
  std::vector<termscope::KnowledgeTriplet> triplets;
};

namespace {

using termscope::ErrorCode;
using termscope::fail;

thread_local std::string g_last_error;

template <class Fn>
ts_status guarded(Fn&& fn) noexcept {
  g_last_error.clear();
  try {
    fn();
    return TS_OK;
  } catch (const termscope::Error& e) {
    g_last_error = e.what();
    return static_cast<ts_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "Internal: out of memory";
  } catch (const std::exception& e) {
    g_last_error = std::string("Internal: ") + e.what();
  } catch (...) {
    g_last_error = "Internal: unknown exception";
  }
  return TS_INTERNAL;
}

template <class T>
void require(const T* p, const char* name) {
  if (p == nullptr) fail(ErrorCode::InvalidArgument, std::string(name) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

termscope::PoolingMode pooling(ts_pooling mode) {
  switch (mode) {
    case TS_POOLING_SLIDING_MAX: return termscope::PoolingMode::SlidingMax;
    case TS_POOLING_WHOLE_MAX: return termscope::PoolingMode::WholeMax;
    case TS_POOLING_WHOLE_MIN: return termscope::PoolingMode::WholeMin;
    case TS_POOLING_WHOLE_AVG: return termscope::PoolingMode::WholeAvg;
  }
  fail(ErrorCode::InvalidArgument, "unknown pooling mode " + std::to_string(int(mode)));
}

ts_similarity to_c(const termscope::SimilarityResult& r) {
  return ts_similarity{r.score, r.best_window_start, r.window_len};
}

ts_span to_c(const termscope::LocatedSpan& s) {
  return ts_span{s.start_frame, s.len_frames, s.start_sec, s.end_sec};
}

ts_ratio to_c(const termscope::Ratio& r) { return ts_ratio{r.value, r.numerator, r.denominator}; }

termscope::LossCase loss_case(double pos, const double* negs, std::size_t count) {
  if (count > 0) require(negs, "sim_negs");
  return termscope::LossCase{pos, std::vector<double>(negs, negs + count)};
}

std::vector<termscope::ManifestEntry> clip_entries(const char* clip_manifest) {
  if (clip_manifest == nullptr || *clip_manifest == '\0') return {};
  return termscope::read_manifest(clip_manifest);
}

}  // namespace

extern "C" {

const char* ts_version(void) { return "1.0.0"; }

const char* ts_status_name(ts_status status) {
  if (status == TS_OK) return "Ok";
  if (status < TS_INVALID_ARGUMENT || status > TS_INTERNAL) return "Unknown";
  return termscope::to_string(static_cast<ErrorCode>(static_cast<int>(status)));
}

const char* ts_last_error_message(void) { return g_last_error.c_str(); }

void ts_string_free(char* s) { std::free(s); }

ts_status ts_embedding_create(uint32_t dim, uint32_t frames, const float* data,
                              uint32_t frame_duration_us, ts_embedding** out) {
  return guarded([&] {
    require(out, "out");
    require(data, "data");
    const auto fd = frame_duration_us ? termscope::FrameDuration::from_microseconds(frame_duration_us)
                                      : termscope::FrameDuration{};
    std::vector<float> values(data, data + std::size_t(dim) * frames);
    *out = new ts_embedding{termscope::EmbeddingSequence(dim, frames, std::move(values), fd)};
  });
}

ts_status ts_embedding_read(const char* path, ts_embedding** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ts_embedding{termscope::read_embeddings_file(path)};
  });
}

ts_status ts_embedding_decode(const void* bytes, size_t size, ts_embedding** out) {
  return guarded([&] {
    require(out, "out");
    if (size > 0) require(bytes, "bytes");
    *out = new ts_embedding{termscope::read_embeddings(
        std::span<const std::byte>(static_cast<const std::byte*>(bytes), size))};
  });
}

ts_status ts_embedding_write(const ts_embedding* e, const char* path, uint64_t* bytes) {
  return guarded([&] {
    require(e, "embedding");
    require(path, "path");
    const auto n = termscope::write_embeddings_file(e->seq, path);
    if (bytes) *bytes = n;
  });
}

ts_status ts_embedding_encode(const ts_embedding* e, char** bytes, size_t* size) {
  return guarded([&] {
    require(e, "embedding");
    require(bytes, "bytes");
    require(size, "size");
    std::ostringstream sink;
    termscope::write_embeddings(e->seq, sink);
    const std::string s = sink.str();
    *bytes = dup_string(s);
    *size = s.size();
  });
}

uint32_t ts_embedding_dim(const ts_embedding* e) { return e ? e->seq.dim() : 0; }
uint32_t ts_embedding_frames(const ts_embedding* e) { return e ? e->seq.frames() : 0; }
uint32_t ts_embedding_frame_duration_us(const ts_embedding* e) {
  return e ? e->seq.frame_duration().microseconds() : 0;
}
const float* ts_embedding_data(const ts_embedding* e) { return e ? e->seq.data().data() : nullptr; }
void ts_embedding_free(ts_embedding* e) { delete e; }

ts_status ts_pool_builder_create(ts_pool_builder** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ts_pool_builder{};
  });
}

ts_status ts_pool_builder_add(ts_pool_builder* b, const char* id, const char* term,
                              const char* translation, const ts_embedding* clip) {
  return guarded([&] {
    require(b, "builder");
    require(id, "id");
    require(term, "term");
    require(translation, "translation");
    require(clip, "clip");
    b->triplets.push_back(termscope::KnowledgeTriplet{
        id, term, translation, std::make_shared<const termscope::EmbeddingSequence>(clip->seq),
        std::nullopt, std::nullopt});
  });
}

ts_status ts_pool_builder_finish(const ts_pool_builder* b, ts_pool** out) {
  return guarded([&] {
    require(b, "builder");
    require(out, "out");
    *out = new ts_pool{termscope::KnowledgePool(b->triplets)};
  });
}

void ts_pool_builder_free(ts_pool_builder* b) { delete b; }

ts_status ts_pool_load(const char* term_table, const char* clip_manifest, ts_pool** out) {
  return guarded([&] {
    require(term_table, "term_table");
    require(out, "out");
    *out = new ts_pool{
        termscope::build_pool(clip_entries(clip_manifest), termscope::read_term_table(term_table))};
  });
}

ts_status ts_build_kb(const char* term_table, const char* clip_manifest, const char* out_path,
                      size_t* triplets, uint32_t* dim) {
  return guarded([&] {
    require(term_table, "term_table");
    require(out_path, "out_path");
    const auto entries = clip_entries(clip_manifest);
    const auto table = termscope::read_term_table(term_table);
    const auto pool = termscope::build_pool(entries, table);
    const std::filesystem::path out(out_path);
    termscope::write_text_file(
        out, termscope::term_table_to_jsonl(termscope::resolve_term_table(entries, table),
                                            out.parent_path().empty() ? "." : out.parent_path()));
    if (triplets) *triplets = pool.size();
    if (dim) *dim = pool.dim();
  });
}

size_t ts_pool_size(const ts_pool* p) { return p ? p->pool.size() : 0; }
uint32_t ts_pool_dim(const ts_pool* p) { return p ? p->pool.dim() : 0; }

const char* ts_pool_triplet_id(const ts_pool* p, size_t index) {
  return p && index < p->pool.size() ? p->pool.at(index).id.c_str() : nullptr;
}
const char* ts_pool_triplet_term(const ts_pool* p, size_t index) {
  return p && index < p->pool.size() ? p->pool.at(index).term.c_str() : nullptr;
}
const char* ts_pool_triplet_translation(const ts_pool* p, size_t index) {
  return p && index < p->pool.size() ? p->pool.at(index).translation.c_str() : nullptr;
}

void ts_pool_free(ts_pool* p) { delete p; }

ts_status ts_parse_pooling(const char* name, ts_pooling* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = static_cast<ts_pooling>(static_cast<int>(termscope::parse_pooling_mode(name)));
  });
}

ts_status ts_sliding_sim(const ts_embedding* u, const ts_embedding* c, ts_similarity* out) {
  return guarded([&] {
    require(u, "utterance");
    require(c, "clip");
    require(out, "out");
    *out = to_c(termscope::sliding_sim(u->seq, c->seq));
  });
}

ts_status ts_sliding_sim_naive(const ts_embedding* u, const ts_embedding* c, ts_similarity* out) {
  return guarded([&] {
    require(u, "utterance");
    require(c, "clip");
    require(out, "out");
    *out = to_c(termscope::sliding_sim_naive(u->seq, c->seq));
  });
}

ts_status ts_baseline_sim(const ts_embedding* u, const ts_embedding* c, ts_pooling mode,
                          ts_similarity* out) {
  return guarded([&] {
    require(u, "utterance");
    require(c, "clip");
    require(out, "out");
    *out = to_c(termscope::baseline_sim(u->seq, c->seq, pooling(mode)));
  });
}

ts_status ts_retrieve_topk(const ts_embedding* u, const ts_pool* pool, size_t k, ts_pooling mode,
                           unsigned threads, ts_hit* hits, size_t capacity, size_t* count) {
  return guarded([&] {
    require(u, "utterance");
    require(pool, "pool");
    require(count, "count");
    if (capacity > 0) require(hits, "hits");
    const auto found = termscope::retrieve_topk(u->seq, pool->pool, k, pooling(mode),
                                                termscope::RetrieveOptions{threads ? threads : 1});
    const std::size_t n = std::min(capacity, found.size());
    for (std::size_t i = 0; i < n; ++i) {
      hits[i] = ts_hit{found[i].pool_index, found[i].rank, to_c(found[i].result)};
    }
    *count = n;
  });
}

ts_status ts_frames_to_span(uint32_t start_frame, uint32_t len_frames, uint32_t frame_duration_us,
                            ts_span* out) {
  return guarded([&] {
    require(out, "out");
    *out = to_c(termscope::frames_to_span(
        start_frame, len_frames, termscope::FrameDuration::from_microseconds(frame_duration_us)));
  });
}

ts_status ts_locate(const ts_embedding* u, const ts_embedding* c, const char* utterance_wav,
                    const char* out_wav, const char* out_semb, ts_similarity* sim, ts_span* span) {
  return guarded([&] {
    require(u, "utterance");
    require(c, "clip");
    std::optional<termscope::WavData> wav;
    if (utterance_wav) wav = termscope::read_wav_file(utterance_wav);
    if (out_wav && !wav) fail(ErrorCode::InvalidArgument, "out_wav needs utterance_wav");
    const auto seg = termscope::locate_and_extract(u->seq, wav ? &*wav : nullptr, c->seq);
    if (out_wav) termscope::write_wav_file(seg.audio->audio, out_wav);
    if (out_semb) termscope::write_embeddings_file(seg.embedding, out_semb);
    if (sim) *sim = to_c(seg.similarity);
    if (span) *span = to_c(seg.span);
  });
}

ts_status ts_slice_audio(const char* wav_in, double start_sec, double end_sec, const char* wav_out,
                         uint64_t* samples) {
  return guarded([&] {
    require(wav_in, "wav_in");
    const auto source = termscope::read_wav_file(wav_in);
    termscope::LocatedSpan span;
    span.start_sec = start_sec;
    span.end_sec = end_sec;
    const auto clip = termscope::slice_audio(source, span);
    if (wav_out) termscope::write_wav_file(clip.audio, wav_out);
    if (samples) *samples = clip.audio.samples.size();
  });
}

ts_status ts_build_prompt_json(const char* spec_json, char** prompt) {
  return guarded([&] {
    require(spec_json, "spec_json");
    require(prompt, "prompt");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(spec_json);
      termscope::PromptSpec spec;
      spec.style = termscope::parse_prompt_style(j.value("style", std::string("locate-focus")));
      spec.src_lang = j.value("src_lang", spec.src_lang);
      spec.tgt_lang = j.value("tgt_lang", spec.tgt_lang);
      spec.utterance_audio = j.at("utterance_audio").get<std::string>();
      for (const auto& item : j.value("items", nlohmann::json::array())) {
        spec.items.push_back({item.value("term", std::string()), item.at("audio").get<std::string>(),
                              item.at("translation").get<std::string>()});
      }
      *prompt = dup_string(termscope::build_prompt(spec));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, std::string("prompt spec: ") + e.what());
    }
  });
}

ts_status ts_tag_reference(const char* reference, const char* const* translations, size_t count,
                           char** tagged) {
  return guarded([&] {
    require(reference, "reference");
    require(tagged, "tagged");
    if (count > 0) require(translations, "translations");
    std::vector<std::string> terms;
    for (std::size_t i = 0; i < count; ++i) {
      require(translations[i], "translation");
      terms.emplace_back(translations[i]);
    }
    *tagged = dup_string(termscope::tag_reference(reference, terms).text);
  });
}

ts_status ts_strip_tags(const char* text, char** stripped) {
  return guarded([&] {
    require(text, "text");
    require(stripped, "stripped");
    *stripped = dup_string(termscope::strip_tags(text));
  });
}

ts_status ts_levenshtein(const char* a, const char* b, size_t* distance) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(distance, "distance");
    *distance = termscope::levenshtein(a, b);
  });
}

ts_status ts_asr_filter(const char* term, const char* transcript, size_t max_distance, int* keep,
                        size_t* distance) {
  return guarded([&] {
    require(term, "term");
    require(transcript, "transcript");
    const auto d = termscope::levenshtein(termscope::normalize_text(term),
                                          termscope::normalize_text(transcript));
    if (keep) {
      *keep = termscope::asr_filter(term, transcript, max_distance) == termscope::AsrDecision::Keep;
    }
    if (distance) *distance = d;
  });
}

ts_status ts_hits_at_n(const char* cases_jsonl, size_t n, ts_ratio* out) {
  return guarded([&] {
    require(cases_jsonl, "cases_jsonl");
    require(out, "out");
    *out = to_c(termscope::hits_at_n(termscope::parse_retrieval_cases(cases_jsonl), n));
  });
}

ts_status ts_term_success_rate(const char* cases_jsonl, ts_ratio* out) {
  return guarded([&] {
    require(cases_jsonl, "cases_jsonl");
    require(out, "out");
    *out = to_c(termscope::term_success_rate(termscope::parse_tsr_cases(cases_jsonl)));
  });
}

ts_status ts_contrastive_loss(double sim_pos, const double* sim_negs, size_t count, double* loss) {
  return guarded([&] {
    require(loss, "loss");
    *loss = termscope::contrastive_loss(loss_case(sim_pos, sim_negs, count));
  });
}

ts_status ts_contrastive_loss_naive(double sim_pos, const double* sim_negs, size_t count,
                                    double* loss) {
  return guarded([&] {
    require(loss, "loss");
    *loss = termscope::contrastive_loss_naive(loss_case(sim_pos, sim_negs, count));
  });
}

ts_status ts_run_corpus(const char* config_path, unsigned threads, char** report_json) {
  return guarded([&] {
    require(config_path, "config_path");
    auto config = termscope::load_config(config_path);
    if (threads) config.threads = threads;
    const auto report = termscope::run_corpus(config);
    if (report_json) *report_json = dup_string(termscope::report_to_json(report));
  });
}

void ts_bench_default_options(ts_bench_options* out) {
  if (!out) return;
  const termscope::BenchOptions d;
  *out = ts_bench_options{d.pool_size, d.frames,     d.dim,  d.clip_frames,
                          d.warmup,    d.iterations, d.seed, d.threads};
}

ts_status ts_bench(const ts_bench_options* options, char** report_json) {
  return guarded([&] {
    require(options, "options");
    require(report_json, "report_json");
    termscope::BenchOptions o;
    o.pool_size = options->pool_size;
    o.frames = options->frames;
    o.dim = options->dim;
    o.clip_frames = options->clip_frames;
    o.warmup = options->warmup;
    o.iterations = options->iterations;
    o.seed = options->seed;
    o.threads = options->threads ? options->threads : 1;
    *report_json = dup_string(termscope::bench_to_json(termscope::run_bench(o)));
  });
}

}  // extern "C"
