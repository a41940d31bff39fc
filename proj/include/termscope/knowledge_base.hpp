#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "termscope/embedding_store.hpp"
#include "termscope/manifest.hpp"
#include "termscope/span.hpp"

namespace termscope {

/// Terminology translation knowledge K = (term, clip, translation).
/// After audio replacement the clip is the located utterance window and
/// `provenance` records where it came from.
struct KnowledgeTriplet {
  std::string id;
  std::string term;
  std::string translation;
  std::shared_ptr<const EmbeddingSequence> clip;
  std::optional<std::string> clip_audio_path;
  std::optional<LocatedSpan> provenance;
};

/// A located speech clip s: its embedding rows, optionally its waveform file,
/// and the span it was cut from.
struct LocatedClip {
  std::shared_ptr<const EmbeddingSequence> embedding;
  std::optional<std::string> audio_path;
  std::optional<LocatedSpan> span;
};

// K' = (x, s, y). Text fields and id are copied untouched.
KnowledgeTriplet replace_clip(const KnowledgeTriplet& triplet, const LocatedClip& located);

/// Per-triplet pooled clip vectors, computed once when the pool is built.
struct PooledClip {
  std::vector<double> max;
  std::vector<double> min;
  std::vector<double> avg;
  double max_norm = 0.0;
  double min_norm = 0.0;
  double avg_norm = 0.0;
};

PooledClip pool_clip(const EmbeddingSequence& clip);

/// Immutable, insertion-ordered collection of triplets sharing one dim.
class KnowledgePool {
 public:
  KnowledgePool() = default;
  // Throws DimMismatch, DuplicateId, InvalidArgument (empty term/translation,
  // missing clip).
  explicit KnowledgePool(std::vector<KnowledgeTriplet> triplets);

  std::size_t size() const noexcept { return triplets_.size(); }
  bool empty() const noexcept { return triplets_.empty(); }
  std::uint32_t dim() const noexcept { return dim_; }
  const KnowledgeTriplet& at(std::size_t index) const { return triplets_.at(index); }
  const PooledClip& pooled(std::size_t index) const { return pooled_.at(index); }
  std::span<const KnowledgeTriplet> triplets() const noexcept { return triplets_; }
  std::optional<std::size_t> find(std::string_view id) const;

 private:
  std::vector<KnowledgeTriplet> triplets_;
  std::vector<PooledClip> pooled_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint32_t dim_ = 0;
};

// Rewrites every clip_emb/clip_audio as a resolved filesystem path: clip_emb
// is looked up among the clip manifest ids first and otherwise read as a path
// relative to the table's directory.
TermTable resolve_term_table(const std::vector<ManifestEntry>& clip_entries,
                             const TermTable& table);

// One triplet per table row, in row order, clips resolved as above.
// Errors: DimMismatch, MissingEmbedding, DuplicateId.
KnowledgePool build_pool(const std::vector<ManifestEntry>& clip_entries, const TermTable& table);

// Serializes a table as JSONL with paths written relative to `relative_to`.
std::string term_table_to_jsonl(const TermTable& table, const std::filesystem::path& relative_to);

}  // namespace termscope
