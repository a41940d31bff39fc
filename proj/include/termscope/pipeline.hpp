#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "termscope/embedding_store.hpp"
#include "termscope/knowledge_base.hpp"
#include "termscope/localization.hpp"
#include "termscope/metrics.hpp"
#include "termscope/prompt_builder.hpp"
#include "termscope/sliding_retrieval.hpp"
#include "termscope/wav.hpp"

namespace termscope {

/// Flat run configuration. Paths are resolved against the config file's
/// directory when loaded from a file.
struct PipelineConfig {
  std::size_t k = 5;
  PoolingMode pooling = PoolingMode::SlidingMax;
  std::optional<FrameDuration> frame_duration;  // overrides the .semb headers
  bool tag_mode = true;
  bool oracle_knowledge = false;  // skip retrieval, use the gold triplets
  PromptStyle prompt_style = PromptStyle::LocateFocus;
  std::string src_lang = "English";
  std::string tgt_lang = "Chinese";
  std::filesystem::path pool;  // term table JSONL
  std::optional<std::filesystem::path> clip_manifest;
  std::filesystem::path utterance_manifest;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> gold;        // {utterance_id, gold_triplet_ids}
  std::optional<std::filesystem::path> references;  // {utterance_id, reference, term_translations?}
  unsigned threads = 1;
};

// A JSON object, or "key = value" lines with '#' comments. Unknown keys and
// malformed values raise ParseError; k == 0 raises InvalidArgument.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

struct UtteranceJob {
  std::string utterance_id;
  std::shared_ptr<const EmbeddingSequence> embedding;
  std::optional<WavData> audio;
  std::string audio_ref;  // how the prompt names the utterance audio
};

struct LocalizedHit {
  RetrievalHit hit;
  LocatedSpan span;
};

// Top-k hits, each with the span of its best window. With oracle_ids set,
// those triplets are used in the given order instead of retrieval.
std::vector<LocalizedHit> run_localization(const UtteranceJob& job, const KnowledgePool& pool,
                                           const PipelineConfig& config,
                                           const std::vector<std::string>* oracle_ids = nullptr);

/// Everything the downstream model needs for one utterance.
struct ContextBundle {
  std::string utterance_id;
  std::vector<LocalizedHit> hits;
  std::vector<KnowledgeTriplet> focused;  // K' per hit, rank order
  std::vector<LocatedSegment> segments;   // located clip per hit
  std::vector<std::string> clip_files;    // stem relative to the bundle directory
  std::string prompt;
};

// Audio replacement per hit, then prompt assembly. Clip stems are
// "clips/NN_<triplet id>"; prompts reference the .wav when the utterance has
// audio, the .semb otherwise.
ContextBundle run_focus(const UtteranceJob& job, const std::vector<LocalizedHit>& hits,
                        const KnowledgePool& pool, const PipelineConfig& config);

// Writes bundle.json, prompt.txt, spans.jsonl and clips/ under dir, replacing
// anything previously there.
void write_bundle(const ContextBundle& bundle, const PipelineConfig& config,
                  const std::filesystem::path& dir);

struct JobFailure {
  std::string utterance_id;
  std::string error;
};

struct CorpusReport {
  std::size_t jobs_total = 0;
  std::size_t jobs_ok = 0;
  std::vector<JobFailure> failures;
  std::vector<std::pair<std::string, Ratio>> metrics;  // "hits@1", ... when gold is given

  std::size_t jobs_failed() const noexcept { return failures.size(); }
};

std::string report_to_json(const CorpusReport& report);

// Processes every utterance, isolating per-job errors, and writes per-job
// bundles plus report.json, prompts.jsonl and (with references)
// tagged_references.jsonl. Output does not depend on config.threads.
CorpusReport run_corpus(const PipelineConfig& config);

}  // namespace termscope
