#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "termscope/error.hpp"
#include "termscope/prompt_builder.hpp"

using namespace termscope;

namespace {

std::string golden(const std::string& name) {
  std::ifstream in(std::string(TERMSCOPE_GOLDEN_DIR) + "/" + name, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

PromptSpec two_words(PromptStyle style) {
  PromptSpec spec;
  spec.style = style;
  spec.items = {{"NLP", "clips/nlp.wav", "自然语言处理"}, {"GPU", "clips/gpu.wav", "图形处理器"}};
  spec.utterance_audio = "common-voice-en.mp3";
  return spec;
}

// Independent count of non-overlapping, longest-first occurrences.
std::size_t count_matches(const std::string& text, std::vector<std::string> terms) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t best = 0;
    for (const auto& t : terms) {
      if (!t.empty() && t.size() > best && text.compare(pos, t.size(), t) == 0) best = t.size();
    }
    if (best) {
      ++n;
      pos += best;
    } else {
      ++pos;
    }
  }
  return n;
}

}  // namespace

TEST_CASE("prompt styles render the literal templates") {
  CHECK(build_prompt(two_words(PromptStyle::LocateFocus)) == golden("locate_focus.txt"));
  CHECK(build_prompt(two_words(PromptStyle::Salm)) == golden("salm.txt"));
  PromptSpec demo;
  demo.style = PromptStyle::RetrieveDemonstrate;
  demo.items = {{"", "demo/sentence.wav", "该软件使用自然语言处理技术"}};
  demo.utterance_audio = "common-voice-en.mp3";
  CHECK(build_prompt(demo) == golden("retrieve_demonstrate.txt"));
}

TEST_CASE("prompt errors and ordering") {
  PromptSpec empty;
  try {
    build_prompt(empty);
    FAIL("expected EmptyTripletList");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyTripletList);
  }
  CHECK_THROWS_AS(build_prompt(two_words(PromptStyle::RetrieveDemonstrate)), Error);

  auto spec = two_words(PromptStyle::LocateFocus);
  spec.items.push_back({"API", "a.wav", "接口"});
  spec.src_lang = "German";
  spec.tgt_lang = "English";
  const auto p = build_prompt(spec);
  CHECK(p.find("NLP") < p.find("GPU"));
  CHECK(p.find("GPU") < p.find("API"));
  CHECK(p.ends_with("Translate from German to English: <audio>common-voice-en.mp3</audio>"));
}

TEST_CASE("prompt style names") {
  for (auto s : {PromptStyle::LocateFocus, PromptStyle::Salm, PromptStyle::RetrieveDemonstrate}) {
    CHECK(parse_prompt_style(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_prompt_style("chatty"), Error);
}

TEST_CASE("NLP tagging example") {
  const auto t = tag_reference("The software utilizes NLP technology", {"NLP"});
  CHECK(t.text == "The software utilizes <Term> NLP technology");
  REQUIRE(t.tag_spans.size() == 1);
  CHECK(t.tag_spans[0] == TagSpan{22, "NLP"});
}

TEST_CASE("every occurrence is tagged and the longest match wins") {
  CHECK(tag_reference("AA AA", {"AA"}).text == "<Term> AA <Term> AA");
  CHECK(tag_reference("AAA", {"AA"}).text == "<Term> AAA");
  CHECK(tag_reference("自然语言处理", {"自然", "自然语言处理"}).text == "<Term> 自然语言处理");
  CHECK(tag_reference("no match", {"xyz", ""}).text == "no match");
  CHECK(tag_reference("", {"a"}).text.empty());
  try {
    tag_reference("already <Term> here", {"here"});
    FAIL("expected AlreadyTagged");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AlreadyTagged);
  }
}

TEST_CASE("strip_tags fixtures") {
  CHECK(strip_tags("The software utilizes <Term> NLP technology") ==
        "The software utilizes NLP technology");
  CHECK(strip_tags("<Term>x") == "x");
  CHECK(strip_tags("<Term> <Term> a") == "a");
  CHECK(strip_tags("<Term") == "<Term");
  CHECK(strip_tags("") == "");
}

TEST_CASE("tag then strip is the identity on 1000 generated references") {
  const std::vector<std::string> alphabet = {"a", "b", "ab", " ", "NLP", "系统", "术语", "。",
                                             "技术", "é", "データ", ",", "x"};
  std::mt19937_64 rng(1234);
  for (int t = 0; t < 1000; ++t) {
    std::string ref;
    const std::size_t tokens = rng() % 20;
    for (std::size_t i = 0; i < tokens; ++i) ref += alphabet[rng() % alphabet.size()];
    std::vector<std::string> terms;
    const std::size_t nterms = rng() % 4;
    for (std::size_t i = 0; i < nterms; ++i) {
      std::string term = alphabet[rng() % alphabet.size()];
      if (rng() % 2) term += alphabet[rng() % alphabet.size()];
      terms.push_back(term);
    }
    const auto tagged = tag_reference(ref, terms);
    CHECK(strip_tags(tagged.text) == ref);
    const std::size_t expected = count_matches(ref, terms);
    CHECK(tagged.tag_spans.size() == expected);
    std::size_t tags = 0;
    for (std::size_t p = tagged.text.find(kTermTag); p != std::string::npos;
         p = tagged.text.find(kTermTag, p + 1)) {
      ++tags;
    }
    CHECK(tags == expected);
    for (const auto& span : tagged.tag_spans) {
      CHECK(ref.compare(span.offset, span.translation.size(), span.translation) == 0);
    }
  }
}
