#include "doctags/export.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

#include "doctags/otsl.hpp"
#include "doctags/strings.hpp"

namespace doctags {

namespace {

// ---------------------------------------------------------------- markdown

std::string escape_pipes(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out;
}

std::string pipe_table(const TableGrid& grid) {
  // Spans flatten: origin text lands in its top-left slot, covered
  // slots stay blank. The first row doubles as the header row.
  std::ostringstream out;
  for (int r = 0; r < grid.rows; ++r) {
    out << '|';
    for (int c = 0; c < grid.cols; ++c) {
      const GridCell& cell = grid.at(r, c);
      out << ' ' << (cell.origin ? escape_pipes(cell.text) : "") << " |";
    }
    out << '\n';
    if (r == 0) {
      out << '|';
      for (int c = 0; c < grid.cols; ++c) out << " --- |";
      out << '\n';
    }
  }
  std::string s = out.str();
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

std::string alt_text(const Block& block) {
  std::string alt;
  for (std::size_t i = 0; i < block.picture_classes.size(); ++i) {
    if (i > 0) alt += ", ";
    alt += picture_class_name(block.picture_classes[i]);
  }
  return alt;
}

void render_markdown_block(const Block& block, const MarkdownOptions& opts,
                           std::vector<std::string>& parts) {
  switch (block.kind) {
    case BlockKind::Title:
      parts.push_back("# " + block.text);
      break;
    case BlockKind::SectionHeader:
      parts.push_back("## " + block.text);
      break;
    case BlockKind::Text:
    case BlockKind::Caption:
    case BlockKind::Footnote:
      parts.push_back(block.text);
      break;
    case BlockKind::ListItem:  // orphan item; lists render their own
      parts.push_back("- " + block.text);
      break;
    case BlockKind::PageHeader:
    case BlockKind::PageFooter:
      if (opts.include_page_furniture) parts.push_back(block.text);
      break;
    case BlockKind::Formula:
      parts.push_back("$$" + block.text + "$$");
      break;
    case BlockKind::Code: {
      std::string fence = "```";
      if (block.code_lang && *block.code_lang != CodeLang::Unknown) {
        fence += code_lang_name(*block.code_lang);
      }
      std::string body = block.text;
      if (!body.empty() && body.back() != '\n') body += '\n';
      parts.push_back(fence + "\n" + body + "```");
      break;
    }
    case BlockKind::OrderedList:
    case BlockKind::UnorderedList: {
      std::string list;
      int n = 1;
      for (const Block& item : block.children) {
        if (!list.empty()) list += '\n';
        if (block.kind == BlockKind::OrderedList) {
          list += std::to_string(n++) + ". " + item.text;
        } else {
          list += "- " + item.text;
        }
      }
      if (!list.empty()) parts.push_back(std::move(list));
      break;
    }
    case BlockKind::Picture:
      parts.push_back("![" + alt_text(block) + "]()");
      for (const Block& child : block.children) render_markdown_block(child, opts, parts);
      break;
    case BlockKind::Otsl:
      if (opts.include_tables && block.table) parts.push_back(pipe_table(*block.table));
      for (const Block& child : block.children) render_markdown_block(child, opts, parts);
      break;
    case BlockKind::DocumentIndex:
      if (block.table) {
        if (opts.include_tables) parts.push_back(pipe_table(*block.table));
      } else if (!block.text.empty()) {
        std::string list;
        std::istringstream lines(block.text);
        std::string line;
        while (std::getline(lines, line)) {
          std::string_view entry = trim_ws(line);
          if (entry.empty()) continue;
          if (!list.empty()) list += '\n';
          list += "- " + std::string(entry);
        }
        if (!list.empty()) parts.push_back(std::move(list));
      }
      break;
  }
}

// ------------------------------------------------------------------- html

void append_loc_attr(const Block& block, HtmlNode& node) {
  if (!block.loc) return;
  node.attrs["data-loc"] = std::to_string(block.loc->x1) + "," + std::to_string(block.loc->y1) +
                           "," + std::to_string(block.loc->x2) + "," +
                           std::to_string(block.loc->y2);
}

HtmlNode simple_node(const char* tag, const Block& block) {
  HtmlNode node;
  node.tag = tag;
  node.text = block.text;
  append_loc_attr(block, node);
  return node;
}

HtmlNode render_html_block(const Block& block);

HtmlNode figure_with_caption(HtmlNode body, const Block& block) {
  bool has_caption = std::any_of(block.children.begin(), block.children.end(),
                                 [](const Block& b) { return b.kind == BlockKind::Caption; });
  if (!has_caption && block.kind != BlockKind::Picture) {
    append_loc_attr(block, body);
    return body;
  }
  HtmlNode figure;
  figure.tag = "figure";
  append_loc_attr(block, figure);
  figure.children.push_back(std::move(body));
  for (const Block& child : block.children) {
    if (child.kind == BlockKind::Caption) {
      HtmlNode cap = simple_node("figcaption", child);
      figure.children.push_back(std::move(cap));
    } else {
      figure.children.push_back(render_html_block(child));
    }
  }
  return figure;
}

HtmlNode render_html_block(const Block& block) {
  switch (block.kind) {
    case BlockKind::Title:
      return simple_node("h1", block);
    case BlockKind::SectionHeader:
      return simple_node("h2", block);
    case BlockKind::Text:
      return simple_node("p", block);
    case BlockKind::Caption: {
      HtmlNode node = simple_node("p", block);
      node.attrs["class"] = "caption";
      return node;
    }
    case BlockKind::Footnote: {
      HtmlNode node = simple_node("p", block);
      node.attrs["class"] = "footnote";
      return node;
    }
    case BlockKind::PageHeader:
      return simple_node("header", block);
    case BlockKind::PageFooter:
      return simple_node("footer", block);
    case BlockKind::Formula: {
      HtmlNode node = simple_node("div", block);
      node.attrs["class"] = "formula";
      node.text = "$$" + block.text + "$$";
      return node;
    }
    case BlockKind::ListItem:
      return simple_node("li", block);
    case BlockKind::OrderedList:
    case BlockKind::UnorderedList: {
      HtmlNode list;
      list.tag = block.kind == BlockKind::OrderedList ? "ol" : "ul";
      append_loc_attr(block, list);
      for (const Block& item : block.children) {
        list.children.push_back(simple_node("li", item));
      }
      return list;
    }
    case BlockKind::Code: {
      HtmlNode pre;
      pre.tag = "pre";
      append_loc_attr(block, pre);
      HtmlNode code;
      code.tag = "code";
      if (block.code_lang) {
        code.attrs["class"] = std::string("language-") + code_lang_name(*block.code_lang);
      }
      code.text = block.text;
      pre.children.push_back(std::move(code));
      return pre;
    }
    case BlockKind::Picture: {
      HtmlNode figure;
      figure.tag = "figure";
      std::string cls = "picture";
      for (PictureClass pc : block.picture_classes) {
        cls += ' ';
        cls += picture_class_name(pc);
      }
      figure.attrs["class"] = cls;
      append_loc_attr(block, figure);
      for (const Block& child : block.children) {
        if (child.kind == BlockKind::Caption) {
          figure.children.push_back(simple_node("figcaption", child));
        } else {
          figure.children.push_back(render_html_block(child));
        }
      }
      return figure;
    }
    case BlockKind::Otsl: {
      HtmlNode table = block.table ? grid_to_html(*block.table) : HtmlNode{"table", {}, "", {}};
      return figure_with_caption(std::move(table), block);
    }
    case BlockKind::DocumentIndex: {
      if (block.table) {
        HtmlNode table = grid_to_html(*block.table);
        table.attrs["class"] = "document-index";
        append_loc_attr(block, table);
        return table;
      }
      HtmlNode node = simple_node("nav", block);
      node.attrs["class"] = "document-index";
      return node;
    }
  }
  return simple_node("p", block);
}

// ------------------------------------------------------------------- json

nlohmann::json block_to_json(const Block& block) {
  nlohmann::json j;
  j["kind"] = block_kind_name(block.kind);
  if (block.loc) j["loc"] = {block.loc->x1, block.loc->y1, block.loc->x2, block.loc->y2};
  if (!block.text.empty()) j["text"] = block.text;
  if (block.code_lang) j["code_lang"] = code_lang_name(*block.code_lang);
  if (!block.picture_classes.empty()) {
    nlohmann::json classes = nlohmann::json::array();
    for (PictureClass pc : block.picture_classes) classes.push_back(picture_class_name(pc));
    j["picture_classes"] = std::move(classes);
  }
  if (block.table) {
    const TableGrid& grid = *block.table;
    nlohmann::json cells = nlohmann::json::array();
    for (int r = 0; r < grid.rows; ++r) {
      for (int c = 0; c < grid.cols; ++c) {
        const GridCell& cell = grid.at(r, c);
        if (!cell.origin) continue;
        nlohmann::json jc;
        jc["row"] = r;
        jc["col"] = c;
        if (cell.row_span > 1) jc["row_span"] = cell.row_span;
        if (cell.col_span > 1) jc["col_span"] = cell.col_span;
        if (cell.role != CellRole::Body) jc["role"] = cell_role_name(cell.role);
        if (!cell.text.empty()) jc["text"] = cell.text;
        cells.push_back(std::move(jc));
      }
    }
    j["table"] = {{"rows", grid.rows}, {"cols", grid.cols}, {"cells", std::move(cells)}};
  }
  if (!block.children.empty()) {
    nlohmann::json children = nlohmann::json::array();
    for (const Block& child : block.children) children.push_back(block_to_json(child));
    j["children"] = std::move(children);
  }
  return j;
}

struct JsonReadError {
  std::string message;
};

Block block_from_json(const nlohmann::json& j);

TableGrid grid_from_json(const nlohmann::json& j) {
  int rows = j.at("rows").get<int>();
  int cols = j.at("cols").get<int>();
  if (rows < 1 || cols < 1 || rows > 100000 || cols > 100000) {
    throw JsonReadError{"table dimensions out of range"};
  }
  TableGrid grid = TableGrid::blank(rows, cols);
  // Mark everything covered, then place origins and let validate()
  // catch inconsistent payloads.
  for (GridCell& cell : grid.cells) {
    cell.origin = false;
    cell.empty = false;
  }
  for (const auto& jc : j.at("cells")) {
    int r = jc.at("row").get<int>();
    int c = jc.at("col").get<int>();
    if (r < 0 || r >= rows || c < 0 || c >= cols) throw JsonReadError{"cell outside the grid"};
    GridCell cell;
    cell.origin = true;
    cell.row_span = jc.contains("row_span") ? jc.at("row_span").get<int>() : 1;
    cell.col_span = jc.contains("col_span") ? jc.at("col_span").get<int>() : 1;
    if (jc.contains("text")) cell.text = jc.at("text").get<std::string>();
    cell.empty = cell.text.empty();
    if (jc.contains("role")) {
      auto role = cell_role_from_name(jc.at("role").get<std::string>());
      if (!role) throw JsonReadError{"unknown cell role"};
      cell.role = *role;
    }
    grid.at(r, c) = std::move(cell);
  }
  return grid;
}

Block block_from_json(const nlohmann::json& j) {
  Block block;
  auto kind = block_kind_from_name(j.at("kind").get<std::string>());
  if (!kind) throw JsonReadError{"unknown block kind \"" + j.at("kind").get<std::string>() + "\""};
  block.kind = *kind;
  if (j.contains("loc")) {
    const auto& loc = j.at("loc");
    if (!loc.is_array() || loc.size() != 4) throw JsonReadError{"loc must be [x1,y1,x2,y2]"};
    block.loc = LocBox{loc[0].get<int>(), loc[1].get<int>(), loc[2].get<int>(), loc[3].get<int>()};
  }
  if (j.contains("text")) block.text = j.at("text").get<std::string>();
  if (j.contains("code_lang")) {
    auto lang = code_lang_from_name(j.at("code_lang").get<std::string>());
    if (!lang) throw JsonReadError{"unknown code language"};
    block.code_lang = *lang;
  }
  if (j.contains("picture_classes")) {
    for (const auto& name : j.at("picture_classes")) {
      auto pc = picture_class_from_name(name.get<std::string>());
      if (!pc) throw JsonReadError{"unknown picture class"};
      block.picture_classes.push_back(*pc);
    }
  }
  if (j.contains("table")) block.table = grid_from_json(j.at("table"));
  if (j.contains("children")) {
    for (const auto& child : j.at("children")) block.children.push_back(block_from_json(child));
  }
  return block;
}

}  // namespace

std::string to_markdown(const Document& doc, const MarkdownOptions& opts) {
  std::vector<std::string> parts;
  for (const Page& page : doc.pages) {
    for (const Block& block : page) render_markdown_block(block, opts, parts);
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += parts[i];
  }
  if (!out.empty()) out += '\n';
  return out;
}

std::string to_html(const Document& doc) {
  std::string out = "<html><body>";
  bool multi_page = doc.pages.size() > 1;
  for (const Page& page : doc.pages) {
    if (multi_page) out += "<div class=\"page\">";
    for (const Block& block : page) {
      out += html_to_string(render_html_block(block));
    }
    if (multi_page) out += "</div>";
  }
  out += "</body></html>";
  return out;
}

std::string to_json(const Document& doc) {
  nlohmann::json j;
  j["schema_version"] = kJsonSchemaVersion;
  nlohmann::json pages = nlohmann::json::array();
  for (const Page& page : doc.pages) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const Block& block : page) blocks.push_back(block_to_json(block));
    pages.push_back({{"blocks", std::move(blocks)}});
  }
  j["pages"] = std::move(pages);
  return j.dump(2);
}

FromJsonResult from_json(std::string_view json_text) {
  FromJsonResult result;
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    result.diagnostics.push_back(
        make_diag(Severity::Error, "json-malformed", "input is not a JSON object"));
    return result;
  }
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != kJsonSchemaVersion) {
    result.diagnostics.push_back(make_diag(Severity::Error, "schema-version-unsupported",
                                           "expected schema_version " +
                                               std::to_string(kJsonSchemaVersion)));
    return result;
  }
  Document doc;
  try {
    for (const auto& jp : j.at("pages")) {
      Page page;
      for (const auto& jb : jp.at("blocks")) page.push_back(block_from_json(jb));
      doc.pages.push_back(std::move(page));
    }
  } catch (const JsonReadError& e) {
    result.diagnostics.push_back(make_diag(Severity::Error, "json-invalid-payload", e.message));
    return result;
  } catch (const nlohmann::json::exception& e) {
    result.diagnostics.push_back(
        make_diag(Severity::Error, "json-malformed", e.what()));
    return result;
  }
  std::vector<Diagnostic> issues = validate(doc);
  if (!issues.empty()) {
    result.diagnostics = std::move(issues);
    return result;
  }
  result.document = std::move(doc);
  return result;
}

}  // namespace doctags
