#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace termscope {

enum class PromptStyle { LocateFocus, Salm, RetrieveDemonstrate };

const char* to_string(PromptStyle style) noexcept;      // "locate-focus", "salm", "retrieve-demonstrate"
PromptStyle parse_prompt_style(std::string_view name);  // throws InvalidArgument

/// One "Word/Audio/Translation" block. RetrieveDemonstrate ignores `term` and
/// uses audio_path/translation as the demonstration sentence pair.
struct PromptItem {
  std::string term;
  std::string audio_path;
  std::string translation;
};

struct PromptSpec {
  PromptStyle style = PromptStyle::LocateFocus;
  std::string src_lang = "English";
  std::string tgt_lang = "Chinese";
  std::vector<PromptItem> items;  // in the order they should appear
  std::string utterance_audio;
};

// Throws EmptyTripletList for no items, InvalidArgument when
// RetrieveDemonstrate gets more than one pair.
std::string build_prompt(const PromptSpec& spec);

inline constexpr std::string_view kTermTag = "<Term>";

struct TagSpan {
  std::size_t offset = 0;  // byte offset of the match in the untagged reference
  std::string translation;

  friend bool operator==(const TagSpan&, const TagSpan&) = default;
};

struct TaggedReference {
  std::string text;
  std::vector<TagSpan> tag_spans;
};

// Inserts "<Term> " before every occurrence of each translation. The scan is
// left to right; at each position the longest matching translation wins and
// the scan resumes after it. Matching is exact and byte-wise (UTF-8 safe).
// Empty translations are ignored. Throws AlreadyTagged.
TaggedReference tag_reference(std::string_view reference,
                              const std::vector<std::string>& translations);

// Removes every "<Term> " and bare "<Term>" in one left-to-right pass.
std::string strip_tags(std::string_view text);

}  // namespace termscope
