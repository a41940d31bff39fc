#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace termscope {

struct Ratio {
  double value = 0.0;
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;
};

struct RetrievalEvalCase {
  std::string utterance_id;
  std::vector<std::string> gold_ids;    // treated as a set; must be non-empty
  std::vector<std::string> ranked_ids;  // best first, no duplicates
};

struct TsrCase {
  std::string utterance_id;
  std::string hypothesis;                 // tags are stripped before matching
  std::vector<std::string> term_targets;  // non-empty strings
};

struct LossCase {
  double sim_pos = 0.0;
  std::vector<double> sim_negs;
};

// Micro average over (case, gold id) pairs: a pair hits when the gold id is
// among the first n ranked ids. Throws EmptyCases, InvalidArgument (n == 0,
// empty gold set, duplicate ranked ids).
Ratio hits_at_n(const std::vector<RetrievalEvalCase>& cases, std::size_t n);

// Micro average over terms: a term succeeds when it is a substring of the
// tag-stripped hypothesis. Throws EmptyCases, InvalidArgument.
Ratio term_success_rate(const std::vector<TsrCase>& cases);

// Edit distance counted in Unicode scalar values of UTF-8 input. Bytes that
// do not decode are compared as single units.
std::size_t levenshtein(std::string_view a, std::string_view b);

// Lowercases ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic letters,
// collapses whitespace runs to one space and trims both ends.
std::string normalize_text(std::string_view text);

enum class AsrDecision { Keep, Discard };

inline constexpr std::size_t kAsrMaxDistance = 3;

const char* to_string(AsrDecision decision) noexcept;  // "keep" / "discard"

// Keep when levenshtein(normalize(term), normalize(transcript)) <= max_distance.
AsrDecision asr_filter(std::string_view term, std::string_view transcript,
                       std::size_t max_distance = kAsrMaxDistance);

// -log(e^pos / (e^pos + sum e^neg)) in log-sum-exp form. Throws NonFiniteValue.
double contrastive_loss(const LossCase& c);
// Direct evaluation of the same expression; overflows for large inputs.
double contrastive_loss_naive(const LossCase& c);

// JSONL readers. Hits: {utterance_id, gold_triplet_ids, ranked_ids}.
// TSR: {utterance_id, hypothesis, term_targets}. Loss: {sim_pos, sim_negs}.
std::vector<RetrievalEvalCase> parse_retrieval_cases(std::string_view jsonl);
std::vector<TsrCase> parse_tsr_cases(std::string_view jsonl);
std::vector<LossCase> parse_loss_cases(std::string_view jsonl);

}  // namespace termscope
