#include "termscope/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "jsonl.hpp"
#include "termscope/error.hpp"
#include "termscope/prompt_builder.hpp"

namespace termscope {
namespace {

Ratio make_ratio(std::uint64_t num, std::uint64_t den) {
  return Ratio{den ? double(num) / double(den) : 0.0, num, den};
}

// Code points of a UTF-8 string. A byte that does not start a well-formed
// sequence maps to 0x110000 + byte so it only equals the same stray byte.
std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (ok && (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
    if (!ok) {
      out.push_back(0x110000 + b0);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp >= 0x110000) {
    out.push_back(char(cp - 0x110000));
  } else if (cp < 0x80) {
    out.push_back(char(cp));
  } else if (cp < 0x800) {
    out.push_back(char(0xC0 | (cp >> 6)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(char(0xE0 | (cp >> 12)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(char(0xF0 | (cp >> 18)));
    out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  }
}

char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c < 0xC0) return c;
  if (c <= 0xDE) return c == 0xD7 ? c : c + 32;
  if (c >= 0x100 && c <= 0x17F) {
    if (c == 0x130) return 'i';
    if (c == 0x178) return 0xFF;
    const bool even_upper = (c <= 0x137) || (c >= 0x14A && c <= 0x177);
    const bool odd_upper = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
    if (even_upper && c % 2 == 0) return c + 1;
    if (odd_upper && c % 2 == 1) return c + 1;
    return c;
  }
  if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 32;
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 37;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 63;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  return c;
}

bool is_space(char32_t c) {
  return c == ' ' || (c >= 0x09 && c <= 0x0D) || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
         c == 0x205F || c == 0x3000;
}

std::size_t edit_distance(const std::vector<char32_t>& a, const std::vector<char32_t>& b) {
  if (a.size() < b.size()) return edit_distance(b, a);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t(0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] != b[j - 1] ? 1 : 0)});
      diag = up;
    }
  }
  return row[b.size()];
}

void check_finite(const LossCase& c) {
  if (!std::isfinite(c.sim_pos)) fail(ErrorCode::NonFiniteValue, "sim_pos is not finite");
  for (std::size_t i = 0; i < c.sim_negs.size(); ++i) {
    if (!std::isfinite(c.sim_negs[i])) {
      fail(ErrorCode::NonFiniteValue, "sim_negs[" + std::to_string(i) + "] is not finite");
    }
  }
}

double number_field(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    fail(ErrorCode::ParseError,
         "line " + std::to_string(line) + ": missing number field \"" + key + "\"");
  }
  return it->get<double>();
}

}  // namespace

Ratio hits_at_n(const std::vector<RetrievalEvalCase>& cases, std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "n must be >= 1");
  if (cases.empty()) fail(ErrorCode::EmptyCases, "no retrieval cases");
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  for (const auto& c : cases) {
    if (c.gold_ids.empty()) {
      fail(ErrorCode::InvalidArgument, "case \"" + c.utterance_id + "\" has no gold ids");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& id : c.ranked_ids) {
      if (!seen.insert(id).second) {
        fail(ErrorCode::InvalidArgument,
             "case \"" + c.utterance_id + "\" ranks \"" + id + "\" more than once");
      }
    }
    const std::size_t top = std::min(n, c.ranked_ids.size());
    const std::set<std::string_view> gold(c.gold_ids.begin(), c.gold_ids.end());
    for (std::string_view g : gold) {
      ++total;
      if (std::find(c.ranked_ids.begin(), c.ranked_ids.begin() + std::ptrdiff_t(top), g) !=
          c.ranked_ids.begin() + std::ptrdiff_t(top)) {
        ++hits;
      }
    }
  }
  return make_ratio(hits, total);
}

Ratio term_success_rate(const std::vector<TsrCase>& cases) {
  if (cases.empty()) fail(ErrorCode::EmptyCases, "no TSR cases");
  std::uint64_t ok = 0;
  std::uint64_t total = 0;
  for (const auto& c : cases) {
    if (c.term_targets.empty()) {
      fail(ErrorCode::InvalidArgument, "case \"" + c.utterance_id + "\" has no term targets");
    }
    const std::string hyp = strip_tags(c.hypothesis);
    for (const auto& t : c.term_targets) {
      if (t.empty()) {
        fail(ErrorCode::InvalidArgument, "case \"" + c.utterance_id + "\" has an empty term");
      }
      ++total;
      if (hyp.find(t) != std::string::npos) ++ok;
    }
  }
  return make_ratio(ok, total);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return edit_distance(decode_utf8(a), decode_utf8(b));
}

std::string normalize_text(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char32_t c : decode_utf8(text)) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    encode_utf8(to_lower(c), out);
  }
  return out;
}

const char* to_string(AsrDecision decision) noexcept {
  return decision == AsrDecision::Keep ? "keep" : "discard";
}

AsrDecision asr_filter(std::string_view term, std::string_view transcript,
                       std::size_t max_distance) {
  return levenshtein(normalize_text(term), normalize_text(transcript)) <= max_distance
             ? AsrDecision::Keep
             : AsrDecision::Discard;
}

double contrastive_loss(const LossCase& c) {
  check_finite(c);
  // loss = logsumexp(pos, negs...) - pos = (m - pos) + log(sum exp(x - m)).
  // The maximum contributes exactly 1, so the rest goes through log1p.
  std::size_t arg = c.sim_negs.size();  // index of the max; size() means pos
  double m = c.sim_pos;
  for (std::size_t i = 0; i < c.sim_negs.size(); ++i) {
    if (c.sim_negs[i] > m) {
      m = c.sim_negs[i];
      arg = i;
    }
  }
  double rest = arg == c.sim_negs.size() ? 0.0 : std::exp(c.sim_pos - m);
  for (std::size_t i = 0; i < c.sim_negs.size(); ++i) {
    if (i != arg) rest += std::exp(c.sim_negs[i] - m);
  }
  return (m - c.sim_pos) + std::log1p(rest);
}

double contrastive_loss_naive(const LossCase& c) {
  check_finite(c);
  const double num = std::exp(c.sim_pos);
  double den = num;
  for (double s : c.sim_negs) den += std::exp(s);
  return -std::log(num / den);
}

std::vector<RetrievalEvalCase> parse_retrieval_cases(std::string_view jsonl) {
  std::vector<RetrievalEvalCase> out;
  detail::for_each_jsonl(jsonl, [&](const nlohmann::json& obj, std::size_t line) {
    out.push_back({detail::require_string(obj, "utterance_id", line),
                   detail::string_list(obj, "gold_triplet_ids", line),
                   detail::string_list(obj, "ranked_ids", line)});
  });
  return out;
}

std::vector<TsrCase> parse_tsr_cases(std::string_view jsonl) {
  std::vector<TsrCase> out;
  detail::for_each_jsonl(jsonl, [&](const nlohmann::json& obj, std::size_t line) {
    out.push_back({detail::require_string(obj, "utterance_id", line),
                   detail::require_string(obj, "hypothesis", line),
                   detail::string_list(obj, "term_targets", line)});
  });
  return out;
}

std::vector<LossCase> parse_loss_cases(std::string_view jsonl) {
  std::vector<LossCase> out;
  detail::for_each_jsonl(jsonl, [&](const nlohmann::json& obj, std::size_t line) {
    LossCase c;
    c.sim_pos = number_field(obj, "sim_pos", line);
    auto it = obj.find("sim_negs");
    if (it != obj.end() && !it->is_null()) {
      if (!it->is_array()) {
        fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": sim_negs must be a list");
      }
      for (const auto& v : *it) {
        if (!v.is_number()) {
          fail(ErrorCode::ParseError,
               "line " + std::to_string(line) + ": sim_negs must hold numbers");
        }
        c.sim_negs.push_back(v.get<double>());
      }
    }
    out.push_back(std::move(c));
  });
  return out;
}

}  // namespace termscope
