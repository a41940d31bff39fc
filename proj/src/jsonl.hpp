#pragma once

// JSONL helpers shared by the readers in this library. Not installed.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "termscope/error.hpp"

namespace termscope::detail {

// Calls fn(object, 1-based line number) for each non-blank line.
template <class Fn>
void for_each_jsonl(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected a JSON object");
    }
    fn(obj, line_no);
  }
}

inline std::string require_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    fail(ErrorCode::ParseError,
         "line " + std::to_string(line) + ": missing string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

inline std::optional<std::string> optional_string(const nlohmann::json& obj, const char* key,
                                                  std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    fail(ErrorCode::ParseError,
         "line " + std::to_string(line) + ": field \"" + key + "\" must be a string");
  }
  return it->get<std::string>();
}

inline std::vector<std::string> string_list(const nlohmann::json& obj, const char* key,
                                            std::size_t line, bool required = true) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) {
      fail(ErrorCode::ParseError,
           "line " + std::to_string(line) + ": missing list field \"" + key + "\"");
    }
    return {};
  }
  if (!it->is_array()) {
    fail(ErrorCode::ParseError,
         "line " + std::to_string(line) + ": field \"" + key + "\" must be a list");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) {
      fail(ErrorCode::ParseError,
           "line " + std::to_string(line) + ": field \"" + key + "\" must hold strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace termscope::detail
