#include "termscope/knowledge_base.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "json.hpp"
#include "kernels.hpp"
#include "termscope/error.hpp"

namespace termscope {

KnowledgeTriplet replace_clip(const KnowledgeTriplet& triplet, const LocatedClip& located) {
  if (!located.embedding) fail(ErrorCode::InvalidArgument, "located clip has no embedding");
  if (triplet.clip && triplet.clip->dim() != located.embedding->dim()) {
    fail(ErrorCode::DimMismatch, "triplet " + triplet.id + " has dim " +
                                     std::to_string(triplet.clip->dim()) + ", located clip has " +
                                     std::to_string(located.embedding->dim()));
  }
  KnowledgeTriplet out = triplet;
  out.clip = located.embedding;
  out.clip_audio_path = located.audio_path;
  out.provenance = located.span;
  return out;
}

PooledClip pool_clip(const EmbeddingSequence& clip) {
  const std::size_t dim = clip.dim();
  PooledClip p;
  p.max.assign(dim, -std::numeric_limits<double>::infinity());
  p.min.assign(dim, std::numeric_limits<double>::infinity());
  p.avg.assign(dim, 0.0);
  for (std::uint32_t f = 0; f < clip.frames(); ++f) {
    const auto row = clip.row(f);
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = row[j];
      p.max[j] = std::max(p.max[j], v);
      p.min[j] = std::min(p.min[j], v);
      p.avg[j] += v;
    }
  }
  for (auto& v : p.avg) v /= double(clip.frames());
  p.max_norm = kernels::norm(p.max.data(), dim);
  p.min_norm = kernels::norm(p.min.data(), dim);
  p.avg_norm = kernels::norm(p.avg.data(), dim);
  return p;
}

KnowledgePool::KnowledgePool(std::vector<KnowledgeTriplet> triplets)
    : triplets_(std::move(triplets)) {
  pooled_.reserve(triplets_.size());
  for (std::size_t i = 0; i < triplets_.size(); ++i) {
    const auto& t = triplets_[i];
    if (t.id.empty()) fail(ErrorCode::InvalidArgument, "triplet " + std::to_string(i) + " has empty id");
    if (t.term.empty()) fail(ErrorCode::InvalidArgument, "triplet " + t.id + " has empty term");
    if (t.translation.empty()) {
      fail(ErrorCode::InvalidArgument, "triplet " + t.id + " has empty translation");
    }
    if (!t.clip) fail(ErrorCode::MissingEmbedding, "triplet " + t.id + " has no clip embedding");
    if (i == 0) {
      dim_ = t.clip->dim();
    } else if (t.clip->dim() != dim_) {
      fail(ErrorCode::DimMismatch, "triplet " + t.id + " has dim " + std::to_string(t.clip->dim()) +
                                       ", pool dim is " + std::to_string(dim_));
    }
    if (!index_.emplace(t.id, i).second) fail(ErrorCode::DuplicateId, "triplet id \"" + t.id + "\"");
    pooled_.push_back(pool_clip(*t.clip));
  }
}

std::optional<std::size_t> KnowledgePool::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TermTable resolve_term_table(const std::vector<ManifestEntry>& clip_entries,
                             const TermTable& table) {
  std::map<std::string, const ManifestEntry*, std::less<>> clips;
  for (const auto& e : clip_entries) clips.emplace(e.id, &e);

  TermTable out;
  for (const auto& row : table.rows) {
    TermRow r = row;
    if (auto it = clips.find(row.clip_emb); it != clips.end()) {
      const ManifestEntry& e = *it->second;
      r.clip_emb = e.resolve(e.emb_path).string();
      if (!r.clip_audio && e.audio_path) r.clip_audio = *e.audio_path;
      if (r.clip_audio) r.clip_audio = e.resolve(*r.clip_audio).string();
    } else {
      r.clip_emb = resolve_against(table.base_dir, row.clip_emb).string();
      if (r.clip_audio) r.clip_audio = resolve_against(table.base_dir, *r.clip_audio).string();
    }
    out.rows.push_back(std::move(r));
  }
  return out;
}

KnowledgePool build_pool(const std::vector<ManifestEntry>& clip_entries, const TermTable& table) {
  const TermTable resolved = resolve_term_table(clip_entries, table);
  std::vector<KnowledgeTriplet> triplets;
  triplets.reserve(resolved.rows.size());
  // Rows may share a clip file; load each once.
  std::map<std::string, std::shared_ptr<const EmbeddingSequence>> cache;
  for (const auto& row : resolved.rows) {
    std::shared_ptr<const EmbeddingSequence>& clip = cache[row.clip_emb];
    if (!clip) {
      if (!std::filesystem::exists(row.clip_emb)) {
        fail(ErrorCode::MissingEmbedding, "triplet " + row.id + ": " + row.clip_emb);
      }
      clip = std::make_shared<const EmbeddingSequence>(read_embeddings_file(row.clip_emb));
    }
    triplets.push_back(KnowledgeTriplet{row.id, row.term, row.translation, clip, row.clip_audio,
                                        std::nullopt});
  }
  return KnowledgePool(std::move(triplets));
}

std::string term_table_to_jsonl(const TermTable& table, const std::filesystem::path& relative_to) {
  auto rel = [&](const std::string& p) {
    if (relative_to.empty()) return p;
    const auto path = std::filesystem::absolute(p).lexically_normal();
    auto r = path.lexically_relative(std::filesystem::absolute(relative_to).lexically_normal());
    return r.empty() ? p : r.generic_string();
  };
  std::string out;
  for (const auto& row : table.rows) {
    nlohmann::ordered_json j;
    j["id"] = row.id;
    j["term"] = row.term;
    j["translation"] = row.translation;
    j["clip_emb"] = rel(row.clip_emb);
    if (row.clip_audio) j["clip_audio"] = rel(*row.clip_audio);
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace termscope
