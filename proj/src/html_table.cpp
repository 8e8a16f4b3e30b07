#include "doctags/html_table.hpp"

#include <cctype>
#include <charconv>

#include "doctags/strings.hpp"

namespace doctags {

int HtmlNode::int_attr(const std::string& name, int fallback) const {
  auto it = attrs.find(name);
  if (it == attrs.end()) return fallback;
  int value = 0;
  const char* first = it->second.data();
  const char* last = first + it->second.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return fallback;
  return value;
}

std::size_t HtmlNode::node_count() const {
  std::size_t n = 1;
  for (const HtmlNode& child : children) n += child.node_count();
  return n;
}

std::string escape_html_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_html_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    if (raw[i] != '&') {
      out += raw[i++];
      continue;
    }
    std::size_t semi = raw.find(';', i);
    if (semi == std::string_view::npos || semi - i > 8) {
      out += raw[i++];
      continue;
    }
    std::string_view entity = raw.substr(i + 1, semi - i - 1);
    if (entity == "amp") out += '&';
    else if (entity == "lt") out += '<';
    else if (entity == "gt") out += '>';
    else if (entity == "quot") out += '"';
    else if (entity == "apos" || entity == "#39") out += '\'';
    else if (entity == "nbsp") out += ' ';
    else {
      out += raw[i++];
      continue;
    }
    i = semi + 1;
  }
  return out;
}

namespace {

void render(const HtmlNode& node, std::string& out) {
  out += '<';
  out += node.tag;
  for (const auto& [name, value] : node.attrs) {
    out += ' ';
    out += name;
    out += "=\"";
    out += escape_html_text(value);
    out += '"';
  }
  out += '>';
  out += escape_html_text(node.text);
  for (const HtmlNode& child : node.children) render(child, out);
  out += "</";
  out += node.tag;
  out += '>';
}

struct SnippetParser {
  std::string_view src;
  std::size_t pos = 0;
  std::vector<Diagnostic> diags;

  static bool is_name_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isalnum(u) != 0 || c == '-' || c == '_';
  }

  void skip_to(char c) {
    std::size_t at = src.find(c, pos);
    pos = (at == std::string_view::npos) ? src.size() : at;
  }

  // Parses one tag at pos ('<' already sighted). Returns the lowercased
  // name; `closing` set for </...>; attrs filled for opening tags.
  std::string read_tag(bool& closing, std::map<std::string, std::string>& attrs) {
    ++pos;  // '<'
    closing = pos < src.size() && src[pos] == '/';
    if (closing) ++pos;
    std::string name;
    while (pos < src.size() && is_name_char(src[pos])) {
      name += static_cast<char>(std::tolower(static_cast<unsigned char>(src[pos])));
      ++pos;
    }
    // Attributes until '>'.
    while (pos < src.size() && src[pos] != '>') {
      if (std::isspace(static_cast<unsigned char>(src[pos]))) {
        ++pos;
        continue;
      }
      if (src[pos] == '/') {  // self-closing slash
        ++pos;
        continue;
      }
      std::string attr_name;
      while (pos < src.size() && is_name_char(src[pos])) {
        attr_name += static_cast<char>(std::tolower(static_cast<unsigned char>(src[pos])));
        ++pos;
      }
      if (attr_name.empty()) {
        ++pos;
        continue;
      }
      std::string value;
      while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
      if (pos < src.size() && src[pos] == '=') {
        ++pos;
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
        if (pos < src.size() && (src[pos] == '"' || src[pos] == '\'')) {
          char quote = src[pos++];
          std::size_t end = src.find(quote, pos);
          if (end == std::string_view::npos) end = src.size();
          value = unescape_html_text(src.substr(pos, end - pos));
          pos = (end == src.size()) ? end : end + 1;
        } else {
          std::size_t start = pos;
          while (pos < src.size() && !std::isspace(static_cast<unsigned char>(src[pos])) &&
                 src[pos] != '>')
            ++pos;
          value = unescape_html_text(src.substr(start, pos - start));
        }
      }
      if (!closing) attrs.emplace(std::move(attr_name), std::move(value));
    }
    if (pos < src.size()) ++pos;  // '>'
    return name;
  }

  static bool keep_tag(const std::string& name) {
    return name == "table" || name == "tr" || name == "td" || name == "th";
  }

  // Structural wrappers inlined transparently; anything else inside a
  // cell is flattened into text.
  static bool wrapper_tag(const std::string& name) {
    return name == "thead" || name == "tbody" || name == "tfoot" || name == "caption" ||
           name == "colgroup" || name == "col";
  }

  // Parses children/text of an open element named `name` into `node`
  // until the matching close tag (or a close tag of an ancestor keep-tag,
  // which is left for the caller).
  void parse_into(HtmlNode& node) {
    while (pos < src.size()) {
      if (src[pos] != '<') {
        std::size_t start = pos;
        skip_to('<');
        std::string run = unescape_html_text(src.substr(start, pos - start));
        append_text(node, run);
        continue;
      }
      std::size_t tag_at = pos;
      bool closing = false;
      std::map<std::string, std::string> attrs;
      std::string name = read_tag(closing, attrs);
      if (closing) {
        if (name == node.tag) return;
        if (keep_tag(name)) {
          // Close of an ancestor: rewind and let the caller handle it.
          pos = tag_at;
          return;
        }
        continue;  // stray or wrapper close, ignore
      }
      if (keep_tag(name)) {
        HtmlNode child;
        child.tag = name;
        child.attrs = std::move(attrs);
        parse_into(child);
        node.children.push_back(std::move(child));
        // Consume the close tag we rewound to, when it matches.
        maybe_consume_close(name);
        continue;
      }
      if (name == "br") {
        append_text(node, "\n");
        continue;
      }
      // Unknown or wrapper element: transparent.
      (void)wrapper_tag(name);
    }
  }

  void maybe_consume_close(const std::string& name) {
    std::size_t saved = pos;
    if (pos >= src.size() || src[pos] != '<') return;
    bool closing = false;
    std::map<std::string, std::string> attrs;
    std::string seen = read_tag(closing, attrs);
    if (!(closing && seen == name)) pos = saved;
  }

  static void append_text(HtmlNode& node, std::string_view run) {
    // Cells keep their character data; structural rows/tables drop
    // inter-tag whitespace.
    if (node.tag == "td" || node.tag == "th") {
      node.text += run;
    }
  }
};

void finalize_cell_text(HtmlNode& node) {
  if (node.tag == "td" || node.tag == "th") {
    node.text = std::string(trim_ws(node.text));
  }
  for (HtmlNode& child : node.children) finalize_cell_text(child);
}

}  // namespace

std::string html_to_string(const HtmlNode& node) {
  std::string out;
  render(node, out);
  return out;
}

HtmlParseResult parse_html_table(std::string_view html) {
  HtmlParseResult result;
  SnippetParser parser{html, 0, {}};
  // Find the first <table ...> opening tag.
  while (parser.pos < html.size()) {
    parser.skip_to('<');
    if (parser.pos >= html.size()) break;
    std::size_t tag_at = parser.pos;
    bool closing = false;
    std::map<std::string, std::string> attrs;
    std::string name = parser.read_tag(closing, attrs);
    if (!closing && name == "table") {
      HtmlNode table;
      table.tag = "table";
      table.attrs = std::move(attrs);
      parser.parse_into(table);
      finalize_cell_text(table);
      result.table = std::move(table);
      result.diagnostics = std::move(parser.diags);
      return result;
    }
    if (parser.pos <= tag_at) parser.pos = tag_at + 1;
  }
  result.diagnostics.push_back(
      make_diag(Severity::Error, "html-not-table", "no <table> element found in input"));
  return result;
}

}  // namespace doctags
