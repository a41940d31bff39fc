#include "termscope/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <set>
#include <thread>

#include "jsonl.hpp"
#include "termscope/error.hpp"
#include "termscope/manifest.hpp"

namespace termscope {
namespace {

using Json = nlohmann::ordered_json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::map<std::string, std::string> flat_pairs(const std::string& text) {
  std::map<std::string, std::string> kv;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const auto& v = it.value();
      if (v.is_string()) {
        kv[it.key()] = v.get<std::string>();
      } else if (v.is_number() || v.is_boolean()) {
        kv[it.key()] = v.dump();
      } else if (!v.is_null()) {
        fail(ErrorCode::ParseError, "config key \"" + it.key() + "\" must be a scalar");
      }
    }
    return kv;
  }
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::ParseError, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    kv[key] = value;
  }
  return kv;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  fail(ErrorCode::ParseError, "config key \"" + key + "\": expected on/off, got \"" + v + "\"");
}

unsigned long long parse_uint(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || v.front() == '-') {
    fail(ErrorCode::ParseError, "config key \"" + key + "\": expected an integer, got \"" + v + "\"");
  }
  return n;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) {
    fail(ErrorCode::ParseError, "config key \"" + key + "\": expected a number, got \"" + v + "\"");
  }
  return d;
}

// Directory-safe utterance ids: no separators, not "." or "..".
void check_dir_name(const std::string& id) {
  if (id.empty() || id == "." || id == ".." || id.find('/') != std::string::npos ||
      id.find('\\') != std::string::npos) {
    fail(ErrorCode::InvalidArgument, "utterance id \"" + id + "\" cannot name an output directory");
  }
}

std::string file_safe(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

Json span_json(const LocatedSpan& s) {
  Json j;
  j["start_frame"] = s.start_frame;
  j["len_frames"] = s.len_frames;
  j["start_sec"] = s.start_sec;
  j["end_sec"] = s.end_sec;
  return j;
}

struct GoldEntry {
  std::vector<std::string> ids;
};

struct ReferenceEntry {
  std::string reference;
  std::optional<std::vector<std::string>> translations;
};

struct JobResult {
  std::string utterance_id;
  bool ok = false;
  std::string error;
  std::string prompt;
  std::vector<std::string> ranked;
  std::optional<std::string> tagged;
};

UtteranceJob load_job(const ManifestEntry& e, const PipelineConfig& config) {
  UtteranceJob job;
  job.utterance_id = e.id;
  EmbeddingSequence seq = read_embeddings_file(e.resolve(e.emb_path));
  if (config.frame_duration && seq.frame_duration() != *config.frame_duration) {
    const auto data = seq.data();
    seq = EmbeddingSequence(seq.dim(), seq.frames(), std::vector<float>(data.begin(), data.end()),
                            *config.frame_duration);
  }
  job.embedding = std::make_shared<const EmbeddingSequence>(std::move(seq));
  if (e.audio_path) {
    job.audio = read_wav_file(e.resolve(*e.audio_path));
    job.audio_ref = *e.audio_path;
  } else {
    job.audio_ref = e.emb_path;
  }
  return job;
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  bool have_pool = false;
  bool have_utts = false;
  bool have_out = false;
  for (const auto& [key, v] : flat_pairs(text)) {
    auto path = [&] { return resolve_against(base_dir, v); };
    if (key == "k") {
      c.k = std::size_t(parse_uint(key, v));
    } else if (key == "pooling") {
      c.pooling = parse_pooling_mode(v);
    } else if (key == "frame_duration") {
      c.frame_duration = FrameDuration::from_seconds(parse_double(key, v));
    } else if (key == "tag_mode") {
      c.tag_mode = parse_bool(key, v);
    } else if (key == "oracle_knowledge") {
      c.oracle_knowledge = parse_bool(key, v);
    } else if (key == "prompt_style") {
      c.prompt_style = parse_prompt_style(v);
    } else if (key == "src_lang") {
      c.src_lang = v;
    } else if (key == "tgt_lang") {
      c.tgt_lang = v;
    } else if (key == "pool") {
      c.pool = path();
      have_pool = true;
    } else if (key == "clip_manifest") {
      c.clip_manifest = path();
    } else if (key == "utterance_manifest") {
      c.utterance_manifest = path();
      have_utts = true;
    } else if (key == "out_dir") {
      c.out_dir = path();
      have_out = true;
    } else if (key == "gold") {
      c.gold = path();
    } else if (key == "references") {
      c.references = path();
    } else if (key == "threads") {
      c.threads = unsigned(std::max(1ULL, parse_uint(key, v)));
    } else {
      fail(ErrorCode::ParseError, "unknown config key \"" + key + "\"");
    }
  }
  if (!have_pool || !have_utts || !have_out) {
    fail(ErrorCode::ParseError, "config needs pool, utterance_manifest and out_dir");
  }
  if (c.k == 0) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_text_file(path), path.parent_path());
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.detail());
  }
}

std::vector<LocalizedHit> run_localization(const UtteranceJob& job, const KnowledgePool& pool,
                                           const PipelineConfig& config,
                                           const std::vector<std::string>* oracle_ids) {
  if (config.k == 0) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (pool.empty()) fail(ErrorCode::EmptyPool, "knowledge pool is empty");
  const EmbeddingSequence& u = *job.embedding;
  std::vector<RetrievalHit> hits;
  if (oracle_ids) {
    for (const auto& id : *oracle_ids) {
      const auto idx = pool.find(id);
      if (!idx) fail(ErrorCode::InvalidArgument, "gold triplet \"" + id + "\" is not in the pool");
      hits.push_back(RetrievalHit{*idx, id, baseline_sim(u, *pool.at(*idx).clip, config.pooling),
                                  std::uint32_t(hits.size() + 1)});
    }
  } else {
    hits = retrieve_topk(u, pool, config.k, config.pooling, RetrieveOptions{config.threads});
  }
  std::vector<LocalizedHit> out;
  out.reserve(hits.size());
  for (auto& h : hits) {
    LocatedSpan span = frames_to_span(h.result.best_window_start, h.result.window_len,
                                      u.frame_duration(), job.utterance_id);
    out.push_back(LocalizedHit{std::move(h), std::move(span)});
  }
  return out;
}

ContextBundle run_focus(const UtteranceJob& job, const std::vector<LocalizedHit>& hits,
                        const KnowledgePool& pool, const PipelineConfig& config) {
  ContextBundle b;
  b.utterance_id = job.utterance_id;
  b.hits = hits;
  const WavData* audio = job.audio ? &*job.audio : nullptr;
  PromptSpec spec;
  spec.style = config.prompt_style;
  spec.src_lang = config.src_lang;
  spec.tgt_lang = config.tgt_lang;
  spec.utterance_audio = job.audio_ref;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const LocalizedHit& h = hits[i];
    LocatedSegment seg = extract_window(*job.embedding, audio, h.hit.result, job.utterance_id);
    char index[16];
    std::snprintf(index, sizeof index, "%02zu", i + 1);
    const std::string stem = "clips/" + std::string(index) + "_" + file_safe(h.hit.triplet_id);
    const std::string clip_ref = stem + (seg.audio ? ".wav" : ".semb");
    LocatedClip located{std::make_shared<const EmbeddingSequence>(seg.embedding),
                        seg.audio ? std::optional<std::string>(clip_ref) : std::nullopt, seg.span};
    b.focused.push_back(replace_clip(pool.at(h.hit.pool_index), located));
    spec.items.push_back(PromptItem{b.focused.back().term, clip_ref, b.focused.back().translation});
    b.segments.push_back(std::move(seg));
    b.clip_files.push_back(stem);
  }
  // The sentence-pair template carries a single demonstration: the top hit.
  if (spec.style == PromptStyle::RetrieveDemonstrate && spec.items.size() > 1) {
    spec.items.resize(1);
  }
  b.prompt = build_prompt(spec);
  return b;
}

void write_bundle(const ContextBundle& bundle, const PipelineConfig& config,
                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  std::filesystem::create_directories(dir / "clips", ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + (dir / "clips").string() + ": " + ec.message());

  Json j;
  j["utterance_id"] = bundle.utterance_id;
  j["k"] = config.k;
  j["pooling"] = to_string(config.pooling);
  j["prompt_style"] = to_string(config.prompt_style);
  j["oracle_knowledge"] = config.oracle_knowledge;
  Json triplets = Json::array();
  std::string spans;
  for (std::size_t i = 0; i < bundle.hits.size(); ++i) {
    const LocalizedHit& h = bundle.hits[i];
    const LocatedSegment& seg = bundle.segments[i];
    const KnowledgeTriplet& kt = bundle.focused[i];
    const std::string& stem = bundle.clip_files[i];
    write_embeddings_file(seg.embedding, dir / (stem + ".semb"));
    if (seg.audio) write_wav_file(seg.audio->audio, dir / (stem + ".wav"));

    Json t;
    t["rank"] = h.hit.rank;
    t["id"] = kt.id;
    t["term"] = kt.term;
    t["translation"] = kt.translation;
    t["score"] = h.hit.result.score;
    t["span"] = span_json(h.span);
    t["clip_emb"] = stem + ".semb";
    t["clip_audio"] = seg.audio ? Json(stem + ".wav") : Json(nullptr);
    triplets.push_back(std::move(t));

    Json s;
    s["utterance_id"] = bundle.utterance_id;
    s["triplet_id"] = h.hit.triplet_id;
    s["start_sec"] = h.span.start_sec;
    s["end_sec"] = h.span.end_sec;
    s["score"] = h.hit.result.score;
    spans += s.dump() + "\n";
  }
  j["triplets"] = std::move(triplets);
  j["prompt"] = bundle.prompt;
  write_text_file(dir / "bundle.json", j.dump(2) + "\n");
  write_text_file(dir / "prompt.txt", bundle.prompt + "\n");
  write_text_file(dir / "spans.jsonl", spans);
}

std::string report_to_json(const CorpusReport& report) {
  Json j;
  j["jobs_total"] = report.jobs_total;
  j["jobs_ok"] = report.jobs_ok;
  j["jobs_failed"] = report.jobs_failed();
  Json failures = Json::array();
  for (const auto& f : report.failures) {
    Json e;
    e["utterance_id"] = f.utterance_id;
    e["error"] = f.error;
    failures.push_back(std::move(e));
  }
  j["failures"] = std::move(failures);
  Json metrics = Json::array();
  for (const auto& [name, r] : report.metrics) {
    Json m;
    m["metric"] = name;
    m["value"] = r.value;
    m["numerator"] = r.numerator;
    m["denominator"] = r.denominator;
    metrics.push_back(std::move(m));
  }
  j["metrics"] = std::move(metrics);
  return j.dump(2) + "\n";
}

CorpusReport run_corpus(const PipelineConfig& config) {
  if (config.k == 0) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (config.oracle_knowledge && !config.gold) {
    fail(ErrorCode::InvalidArgument, "oracle_knowledge needs a gold file");
  }
  std::vector<ManifestEntry> clip_entries;
  if (config.clip_manifest) clip_entries = read_manifest(*config.clip_manifest);
  const KnowledgePool pool = build_pool(clip_entries, read_term_table(config.pool));

  std::vector<ManifestEntry> utterances;
  for (auto& e : read_manifest(config.utterance_manifest)) {
    if (e.kind == EntryKind::Utterance) utterances.push_back(std::move(e));
  }

  std::map<std::string, GoldEntry> gold;
  if (config.gold) {
    detail::for_each_jsonl(read_text_file(*config.gold),
                           [&](const nlohmann::json& obj, std::size_t line) {
                             gold[detail::require_string(obj, "utterance_id", line)] =
                                 GoldEntry{detail::string_list(obj, "gold_triplet_ids", line)};
                           });
  }
  std::map<std::string, ReferenceEntry> references;
  if (config.references) {
    detail::for_each_jsonl(
        read_text_file(*config.references), [&](const nlohmann::json& obj, std::size_t line) {
          ReferenceEntry r;
          r.reference = detail::require_string(obj, "reference", line);
          if (obj.contains("term_translations")) {
            r.translations = detail::string_list(obj, "term_translations", line);
          }
          references[detail::require_string(obj, "utterance_id", line)] = std::move(r);
        });
  }

  const bool score_hits = !gold.empty() && !config.oracle_knowledge;
  const std::size_t ranked_k = std::max<std::size_t>(config.k, 10);
  const std::size_t n = utterances.size();
  const unsigned workers = unsigned(std::max<std::size_t>(1, std::min<std::size_t>(config.threads, n)));
  PipelineConfig job_config = config;
  job_config.threads = std::max(1u, config.threads / workers);

  std::vector<JobResult> results(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const ManifestEntry& e = utterances[i];
      JobResult& r = results[i];
      r.utterance_id = e.id;
      try {
        check_dir_name(e.id);
        const UtteranceJob job = load_job(e, job_config);
        const auto g = gold.find(e.id);
        std::vector<LocalizedHit> hits;
        if (config.oracle_knowledge) {
          if (g == gold.end() || g->second.ids.empty()) {
            fail(ErrorCode::InvalidArgument, "no gold triplets for oracle knowledge");
          }
          hits = run_localization(job, pool, job_config, &g->second.ids);
        } else {
          PipelineConfig wide = job_config;
          if (score_hits) wide.k = ranked_k;
          hits = run_localization(job, pool, wide);
          for (const auto& h : hits) r.ranked.push_back(h.hit.triplet_id);
          if (hits.size() > config.k) hits.resize(config.k);
        }
        const ContextBundle bundle = run_focus(job, hits, pool, job_config);
        if (config.tag_mode) {
          if (const auto ref = references.find(e.id); ref != references.end()) {
            std::vector<std::string> terms;
            if (ref->second.translations) {
              terms = *ref->second.translations;
            } else if (g != gold.end()) {
              for (const auto& id : g->second.ids) {
                if (const auto idx = pool.find(id)) terms.push_back(pool.at(*idx).translation);
              }
            }
            r.tagged = tag_reference(ref->second.reference, terms).text;
          }
        }
        write_bundle(bundle, config, config.out_dir / e.id);
        r.prompt = bundle.prompt;
        r.ok = true;
      } catch (const std::exception& ex) {
        r.ok = false;
        r.error = ex.what();
        r.ranked.clear();
        r.tagged.reset();
        std::error_code ec;
        if (!e.id.empty() && e.id.find('/') == std::string::npos && e.id != "." && e.id != "..") {
          std::filesystem::remove_all(config.out_dir / e.id, ec);
        }
      }
    }
  };

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + config.out_dir.string() + ": " + ec.message());
  {
    std::vector<std::jthread> pool_threads;
    for (unsigned w = 1; w < workers; ++w) pool_threads.emplace_back(work);
    work();
  }

  CorpusReport report;
  report.jobs_total = n;
  std::string prompts;
  std::string tagged;
  std::vector<RetrievalEvalCase> cases;
  for (const auto& r : results) {
    if (r.ok) {
      ++report.jobs_ok;
      Json p;
      p["utterance_id"] = r.utterance_id;
      p["prompt"] = r.prompt;
      prompts += p.dump() + "\n";
      if (r.tagged) {
        Json t;
        t["utterance_id"] = r.utterance_id;
        t["tagged_reference"] = *r.tagged;
        tagged += t.dump() + "\n";
      }
    } else {
      report.failures.push_back({r.utterance_id, r.error});
    }
    if (score_hits) {
      // Failed jobs keep their gold pairs and count as misses.
      const auto g = gold.find(r.utterance_id);
      if (g != gold.end() && !g->second.ids.empty()) {
        cases.push_back({r.utterance_id, g->second.ids, r.ranked});
      }
    }
  }
  if (!cases.empty()) {
    for (std::size_t at : {std::size_t(1), std::size_t(5), std::size_t(10)}) {
      report.metrics.emplace_back("hits@" + std::to_string(at), hits_at_n(cases, at));
    }
  }
  write_text_file(config.out_dir / "prompts.jsonl", prompts);
  if (config.references) write_text_file(config.out_dir / "tagged_references.jsonl", tagged);
  write_text_file(config.out_dir / "report.json", report_to_json(report));
  return report;
}

}  // namespace termscope
