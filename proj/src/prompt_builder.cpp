#include "termscope/prompt_builder.hpp"

#include <algorithm>

#include "termscope/error.hpp"

namespace termscope {
namespace {

constexpr std::string_view kLocateFocusHead =
    "I've provided a selection of words along with their audio from a dictionary. You can "
    "utilize these words for the upcoming speech translations. But please note that some of "
    "them may include information unrelated to the utterance. Bilingual words: ";
constexpr std::string_view kSalmHead =
    "I've provided a selection of words from a dictionary. You can utilize these words for the "
    "upcoming speech translations. But please note that some of them may include information "
    "unrelated to the utterance. Bilingual words: ";
constexpr std::string_view kDemonstrateHead =
    "I have provided a pair of sentences that include important entities. You can use these "
    "entities for the upcoming speech translations. But please note that some of them may "
    "include information unrelated to the utterance. ";

constexpr std::string_view kTagInsert = "<Term> ";

std::string word_blocks(const std::vector<PromptItem>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += "Word: " + items[i].term + ", Audio: <audio>" + items[i].audio_path +
           "</audio>, Translation: " + items[i].translation;
  }
  return out;
}

}  // namespace

const char* to_string(PromptStyle style) noexcept {
  switch (style) {
    case PromptStyle::LocateFocus: return "locate-focus";
    case PromptStyle::Salm: return "salm";
    case PromptStyle::RetrieveDemonstrate: return "retrieve-demonstrate";
  }
  return "unknown";
}

PromptStyle parse_prompt_style(std::string_view name) {
  for (PromptStyle s : {PromptStyle::LocateFocus, PromptStyle::Salm,
                        PromptStyle::RetrieveDemonstrate}) {
    if (name == to_string(s)) return s;
  }
  fail(ErrorCode::InvalidArgument, "unknown prompt style '" + std::string(name) + "'");
}

std::string build_prompt(const PromptSpec& spec) {
  if (spec.items.empty()) fail(ErrorCode::EmptyTripletList, "prompt needs at least one item");
  const std::string tail =
      "Translate from " + spec.src_lang + " to " + spec.tgt_lang + ": <audio>" +
      spec.utterance_audio + "</audio>";
  std::string out;
  switch (spec.style) {
    case PromptStyle::LocateFocus:
      out.append(kLocateFocusHead).append(word_blocks(spec.items)).append(" . ");
      break;
    case PromptStyle::Salm:
      // The SALM template closes the list with a bare period.
      out.append(kSalmHead).append(word_blocks(spec.items)).append(". ");
      break;
    case PromptStyle::RetrieveDemonstrate:
      if (spec.items.size() != 1) {
        fail(ErrorCode::InvalidArgument,
             "retrieve-demonstrate takes exactly one sentence pair, got " +
                 std::to_string(spec.items.size()));
      }
      out.append(kDemonstrateHead)
          .append("Audio: <audio>" + spec.items[0].audio_path + "</audio>, Translation: " +
                  spec.items[0].translation)
          .append(" . ");
      break;
  }
  return out + tail;
}

TaggedReference tag_reference(std::string_view reference,
                              const std::vector<std::string>& translations) {
  if (reference.find(kTermTag) != std::string_view::npos) {
    fail(ErrorCode::AlreadyTagged, "reference already contains " + std::string(kTermTag));
  }
  std::vector<std::string_view> terms;
  for (const auto& t : translations) {
    if (!t.empty()) terms.push_back(t);
  }
  std::sort(terms.begin(), terms.end(), [](std::string_view a, std::string_view b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

  TaggedReference out;
  out.text.reserve(reference.size());
  std::size_t pos = 0;
  while (pos < reference.size()) {
    const std::string_view rest = reference.substr(pos);
    auto hit = std::find_if(terms.begin(), terms.end(),
                            [&](std::string_view t) { return rest.starts_with(t); });
    if (hit == terms.end()) {
      out.text.push_back(reference[pos++]);
      continue;
    }
    out.tag_spans.push_back({pos, std::string(*hit)});
    out.text.append(kTagInsert).append(*hit);
    pos += hit->size();
  }
  return out;
}

std::string strip_tags(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::string_view rest = text.substr(pos);
    if (rest.starts_with(kTagInsert)) {
      pos += kTagInsert.size();
    } else if (rest.starts_with(kTermTag)) {
      pos += kTermTag.size();
    } else {
      out.push_back(text[pos++]);
    }
  }
  return out;
}

}  // namespace termscope
