#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace termscope {

enum class EntryKind { Utterance, Clip };

/// One line of a manifest JSONL file. Paths are kept as written; resolve()
/// interprets them relative to the directory holding the manifest.
struct ManifestEntry {
  std::string id;
  EntryKind kind = EntryKind::Utterance;
  std::string emb_path;
  std::optional<std::string> audio_path;
  std::optional<std::string> transcript;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& relative) const;
};

// Unknown fields are ignored; duplicate ids raise DuplicateId.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
std::vector<ManifestEntry> parse_manifest(const std::string& jsonl,
                                          const std::filesystem::path& base_dir);

/// One row of the terminology table: {id, term, translation, clip_emb, clip_audio}.
/// clip_emb names either a clip manifest id or a .semb path.
struct TermRow {
  std::string id;
  std::string term;
  std::string translation;
  std::string clip_emb;
  std::optional<std::string> clip_audio;
};

struct TermTable {
  std::vector<TermRow> rows;
  std::filesystem::path base_dir;
};

TermTable read_term_table(const std::filesystem::path& path);
TermTable parse_term_table(const std::string& jsonl, const std::filesystem::path& base_dir);

// Shared helpers for the JSONL files in this project.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::filesystem::path resolve_against(const std::filesystem::path& base_dir,
                                      const std::string& relative);

}  // namespace termscope
