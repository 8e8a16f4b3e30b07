#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "doctags/diagnostics.hpp"
#include "doctags/model.hpp"

namespace doctags {

struct MarkdownOptions {
  bool include_page_furniture = false;  // page_header/page_footer blocks
  bool include_tables = false;          // table grids (captions always render)
};

/// CommonMark rendering: title `#`, section_header `##`, paragraphs for
/// text-like blocks, `-`/`1.` list items, fenced code with a language
/// tag, $$...$$ formulas, image placeholders with picture classes as
/// alt text, pipe tables with spans flattened to their top-left slot.
/// Reading order is document order.
std::string to_markdown(const Document& doc, const MarkdownOptions& opts = {});

/// Semantic HTML: h1/h2, p, ol/ul/li, pre>code, figure>figcaption,
/// tables via grid_to_html. Bounding boxes appear as data-loc
/// attributes. Multi-page documents wrap each page in a container div.
std::string to_html(const Document& doc);

inline constexpr int kJsonSchemaVersion = 1;

/// Lossless persistence; from_json(to_json(d)) == d.
std::string to_json(const Document& doc);

struct FromJsonResult {
  std::optional<Document> document;
  std::vector<Diagnostic> diagnostics;
};

/// Rejects unknown schema_version (`schema-version-unsupported`),
/// malformed payloads (`json-malformed`), and documents that fail
/// validate() (their diagnostics are returned).
FromJsonResult from_json(std::string_view json_text);

}  // namespace doctags
