#include "termscope/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "jsonl.hpp"
#include "termscope/error.hpp"

namespace termscope {

std::filesystem::path resolve_against(const std::filesystem::path& base_dir,
                                      const std::string& relative) {
  std::filesystem::path p(relative);
  if (p.is_absolute()) return p.lexically_normal();
  return (base_dir / p).lexically_normal();
}

std::filesystem::path ManifestEntry::resolve(const std::string& relative) const {
  return resolve_against(base_dir, relative);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open for writing: " + path.string());
  out << text;
  out.close();
  if (!out) fail(ErrorCode::Io, "failed to write " + path.string());
}

std::vector<ManifestEntry> parse_manifest(const std::string& jsonl,
                                          const std::filesystem::path& base_dir) {
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  detail::for_each_jsonl(jsonl, [&](const nlohmann::json& obj, std::size_t line) {
    ManifestEntry e;
    e.id = detail::require_string(obj, "id", line);
    const std::string kind = detail::optional_string(obj, "kind", line).value_or("utterance");
    if (kind == "utterance") {
      e.kind = EntryKind::Utterance;
    } else if (kind == "clip") {
      e.kind = EntryKind::Clip;
    } else {
      fail(ErrorCode::ParseError,
           "line " + std::to_string(line) + ": kind must be \"utterance\" or \"clip\"");
    }
    e.emb_path = detail::require_string(obj, "emb_path", line);
    e.audio_path = detail::optional_string(obj, "audio_path", line);
    e.transcript = detail::optional_string(obj, "transcript", line);
    e.base_dir = base_dir;
    if (!seen.insert(e.id).second) {
      fail(ErrorCode::DuplicateId, "line " + std::to_string(line) + ": id \"" + e.id + "\"");
    }
    entries.push_back(std::move(e));
  });
  return entries;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path), path.parent_path());
}

TermTable parse_term_table(const std::string& jsonl, const std::filesystem::path& base_dir) {
  TermTable table;
  table.base_dir = base_dir;
  detail::for_each_jsonl(jsonl, [&](const nlohmann::json& obj, std::size_t line) {
    TermRow row;
    row.id = detail::require_string(obj, "id", line);
    row.term = detail::require_string(obj, "term", line);
    row.translation = detail::require_string(obj, "translation", line);
    row.clip_emb = detail::require_string(obj, "clip_emb", line);
    row.clip_audio = detail::optional_string(obj, "clip_audio", line);
    table.rows.push_back(std::move(row));
  });
  return table;
}

TermTable read_term_table(const std::filesystem::path& path) {
  return parse_term_table(read_text_file(path), path.parent_path());
}

}  // namespace termscope
