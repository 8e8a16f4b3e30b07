#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "doctags/diagnostics.hpp"
#include "doctags/model.hpp"

namespace doctags {

enum class TokenKind { Open, Close, Standalone, Text };

struct Token {
  TokenKind kind = TokenKind::Text;
  std::string name;              // tag name for Open/Close/Standalone
  std::optional<int> loc_value;  // payload of loc_N tags, clamped to the grid
  std::string text;              // Text: raw run content
  SourceSpan span;
  bool from_unknown_tag = false;  // text fallback born from an unknown <...> construct
};

/// Token equality as used by repetition detection: spans are ignored.
bool same_token(const Token& a, const Token& b);

struct TokenizeResult {
  std::vector<Token> tokens;
  std::vector<Diagnostic> diagnostics;
};

/// Lossless lexing: token spans tile the input with no gaps or
/// overlaps. Only vocabulary names lex as tags; unknown tag-shaped
/// <...> constructs become text fallbacks plus an `unknown-tag`
/// diagnostic, and out-of-range loc payloads are clamped with
/// `loc-out-of-range`. The input is treated as bytes, so invalid UTF-8
/// passes through inside text runs.
TokenizeResult tokenize(std::string_view source);

inline constexpr int kDefaultMinRepeats = 4;
inline constexpr int kDefaultMaxPeriod = 32;

/// Finds the earliest suffix of the stream consisting of at least
/// min_repeats consecutive exact repetitions of some token sequence of
/// length <= max_period that extends to the stream's end. Returns the
/// index where the second repetition starts, so truncating there keeps
/// exactly one period; nothing when no such suffix exists. Ties on the
/// start index resolve to the smallest period.
std::optional<std::size_t> detect_repetition(std::span<const Token> tokens, int min_repeats,
                                             int max_period);

struct ParseResult {
  std::optional<Document> document;  // always present in lenient mode
  std::vector<Diagnostic> diagnostics;
};

/// Strict mode returns a document satisfying every model invariant, or
/// error diagnostics and no document. Lenient mode always returns a
/// valid document: unclosed tags auto-close at the next sibling-level
/// open tag or page end, missing loc runs are tolerated (info), loc
/// payloads are clamped, repetition loops are truncated
/// (detect_repetition with the default thresholds), stray text becomes
/// implicit text blocks, orphan list items are wrapped — each repair
/// recorded as a warning.
ParseResult parse(std::string_view source, ParseMode mode);

/// Canonical form: single <doctag> root, page_break between pages;
/// within a block loc tags first, then the code-language or
/// picture-class tags, then content, then children; no whitespace
/// between tags; code/formula content byte-preserved. Throws
/// std::invalid_argument when validate(doc) is non-empty.
std::string serialize(const Document& doc);

}  // namespace doctags
