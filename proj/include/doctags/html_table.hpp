#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "doctags/diagnostics.hpp"

namespace doctags {

/// Minimal HTML element tree used for table interchange and tree-edit
/// scoring. The toolkit itself only produces the table subset
/// (table > tr > td/th); the snippet parser tolerates wrapper markup
/// commonly found in ground-truth files (thead/tbody, inline b/i/span)
/// by flattening it away.
struct HtmlNode {
  std::string tag;
  std::map<std::string, std::string> attrs;
  std::string text;
  std::vector<HtmlNode> children;

  /// Attribute parsed as int, `fallback` when absent or malformed.
  int int_attr(const std::string& name, int fallback) const;
  std::size_t node_count() const;

  bool operator==(const HtmlNode&) const = default;
};

std::string escape_html_text(std::string_view raw);
std::string unescape_html_text(std::string_view raw);

/// Compact rendering, no insignificant whitespace between tags.
std::string html_to_string(const HtmlNode& node);

struct HtmlParseResult {
  std::optional<HtmlNode> table;
  std::vector<Diagnostic> diagnostics;
};

/// Extracts the first <table> element of an HTML snippet as a
/// table/tr/td/th tree. Sectioning wrappers (thead, tbody, tfoot) are
/// inlined; inline markup inside cells is flattened into the cell text.
/// Returns no table plus an error diagnostic when the snippet contains
/// none.
HtmlParseResult parse_html_table(std::string_view html);

}  // namespace doctags
