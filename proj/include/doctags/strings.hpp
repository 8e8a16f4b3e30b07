#pragma once

#include <string_view>

namespace doctags {

inline bool is_ascii_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim_ws(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_ascii_ws(text[begin])) ++begin;
  while (end > begin && is_ascii_ws(text[end - 1])) --end;
  return text.substr(begin, end - begin);
}

inline bool is_blank(std::string_view text) { return trim_ws(text).empty(); }

}  // namespace doctags
