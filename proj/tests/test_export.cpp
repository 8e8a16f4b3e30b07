#include "doctest.h"

#include "doctags/export.hpp"

#include <cctype>
#include <sstream>
#include <string>

#include "doctags/parser.hpp"
#include "doctags/strings.hpp"
#include "support/generators.hpp"

using namespace doctags;

namespace {

Document doc_with(Block block) {
  Document doc = Document::empty();
  doc.pages[0].push_back(std::move(block));
  return doc;
}

Block text_block(BlockKind kind, const char* text) {
  Block b;
  b.kind = kind;
  b.text = text;
  return b;
}

// Strips markdown back to plain words: fences, heading markers, list
// markers, emphasis on whitespace normalization.
std::string naive_markdown_strip(const std::string& markdown) {
  std::string out;
  std::istringstream lines(markdown);
  std::string line;
  while (std::getline(lines, line)) {
    std::string_view v = trim_ws(line);
    if (v.starts_with("```")) continue;
    if (v.starts_with("# ")) v.remove_prefix(2);
    else if (v.starts_with("## ")) v.remove_prefix(3);
    else if (v.starts_with("- ")) v.remove_prefix(2);
    else {
      std::size_t k = 0;
      while (k < v.size() && std::isdigit(static_cast<unsigned char>(v[k]))) ++k;
      if (k > 0 && k + 1 < v.size() && v[k] == '.' && v[k + 1] == ' ') v.remove_prefix(k + 2);
    }
    out += v;
    out += ' ';
  }
  return out;
}

std::string squash_ws(std::string_view text) {
  std::string out;
  bool in_space = true;
  for (char c : text) {
    if (is_ascii_ws(c)) {
      if (!in_space) out += ' ';
      in_space = true;
    } else {
      out += c;
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace

TEST_CASE("to_markdown: worked examples") {
  SUBCASE("heading plus paragraph") {
    Document doc = Document::empty();
    doc.pages[0].push_back(text_block(BlockKind::SectionHeader, "Intro"));
    doc.pages[0].push_back(text_block(BlockKind::Text, "Hi"));
    CHECK(to_markdown(doc) == "## Intro\n\nHi\n");
  }
  SUBCASE("page furniture is dropped by default") {
    Document doc = doc_with(text_block(BlockKind::PageFooter, "3"));
    CHECK(to_markdown(doc) == "");
    MarkdownOptions opts;
    opts.include_page_furniture = true;
    CHECK(to_markdown(doc, opts) == "3\n");
  }
  SUBCASE("code keeps language and indentation") {
    Block code = text_block(BlockKind::Code, "a;\n b;");
    code.code_lang = CodeLang::Cpp;
    CHECK(to_markdown(doc_with(std::move(code))) == "```C++\na;\n b;\n```\n");
  }
  SUBCASE("formula wraps in display math") {
    CHECK(to_markdown(doc_with(text_block(BlockKind::Formula, "x^{2}"))) == "$$x^{2}$$\n");
  }
  SUBCASE("lists render their markers") {
    Block list;
    list.kind = BlockKind::OrderedList;
    list.children.push_back(text_block(BlockKind::ListItem, "one"));
    list.children.push_back(text_block(BlockKind::ListItem, "two"));
    CHECK(to_markdown(doc_with(std::move(list))) == "1. one\n2. two\n");

    Block ul;
    ul.kind = BlockKind::UnorderedList;
    ul.children.push_back(text_block(BlockKind::ListItem, "only"));
    CHECK(to_markdown(doc_with(std::move(ul))) == "- only\n");
  }
  SUBCASE("pictures become placeholders with classes as alt text") {
    Block pic;
    pic.kind = BlockKind::Picture;
    pic.picture_classes = {PictureClass::PieChart, PictureClass::Logo};
    CHECK(to_markdown(doc_with(std::move(pic))) == "![pie_chart, logo]()\n");
  }
  SUBCASE("tables render only when asked; captions always do") {
    Block table;
    table.kind = BlockKind::Otsl;
    TableGrid grid = TableGrid::blank(2, 2);
    grid.at(0, 0).text = "h1";
    grid.at(0, 0).empty = false;
    grid.at(0, 1).text = "h2";
    grid.at(0, 1).empty = false;
    grid.at(1, 0).text = "a";
    grid.at(1, 0).empty = false;
    grid.at(1, 1).text = "b";
    grid.at(1, 1).empty = false;
    table.table = std::move(grid);
    table.children.push_back(text_block(BlockKind::Caption, "numbers"));
    Document doc = doc_with(std::move(table));

    CHECK(to_markdown(doc) == "numbers\n");
    MarkdownOptions opts;
    opts.include_tables = true;
    CHECK(to_markdown(doc, opts) ==
          "| h1 | h2 |\n| --- | --- |\n| a | b |\n\nnumbers\n");
  }
}

TEST_CASE("to_markdown output never leaks markup tokens") {
  testgen::Rng rng(4040);
  for (int i = 0; i < 100; ++i) {
    Document doc = testgen::random_document(rng);
    MarkdownOptions opts;
    opts.include_tables = true;
    opts.include_page_furniture = true;
    std::string md = to_markdown(doc, opts);
    CHECK(md.find("<doctag>") == std::string::npos);
    CHECK(md.find("<fcel>") == std::string::npos);
    CHECK(md.find("<text>") == std::string::npos);
    CHECK(md.find("<loc_") == std::string::npos);
  }
}

TEST_CASE("markdown strip recovers text content for prose documents") {
  testgen::Rng rng(808080);
  for (int i = 0; i < 100; ++i) {
    // Prose-only documents: no tables, pictures, or formulas.
    Document doc = Document::empty();
    int blocks = testgen::pick(rng, 1, 6);
    std::string expected;
    for (int b = 0; b < blocks; ++b) {
      static const BlockKind kProse[] = {BlockKind::Text, BlockKind::SectionHeader,
                                         BlockKind::Title, BlockKind::Footnote,
                                         BlockKind::Caption};
      Block block = text_block(kProse[testgen::pick(rng, 0, 4)], "");
      // Text that itself starts like a markdown marker is outside the
      // recovery property's domain.
      auto marker_like = [](const std::string& t) {
        if (t.starts_with("- ") || t.starts_with("# ")) return true;
        std::size_t k = 0;
        while (k < t.size() && std::isdigit(static_cast<unsigned char>(t[k]))) ++k;
        return k > 0 && k + 1 < t.size() && t[k] == '.' && t[k + 1] == ' ';
      };
      do {
        block.text = testgen::random_text(rng, 1, 6);
      } while (marker_like(block.text));
      expected += block.text + " ";
      doc.pages[0].push_back(std::move(block));
    }
    std::string stripped = naive_markdown_strip(to_markdown(doc));
    CHECK(squash_ws(stripped) == squash_ws(expected));
  }
}

TEST_CASE("to_html: worked examples") {
  SUBCASE("empty document") {
    CHECK(to_html(Document::empty()) == "<html><body></body></html>");
  }
  SUBCASE("table with caption binds them in a figure") {
    Block table;
    table.kind = BlockKind::Otsl;
    TableGrid grid = TableGrid::blank(1, 1);
    grid.at(0, 0).text = "x";
    grid.at(0, 0).empty = false;
    table.table = std::move(grid);
    table.children.push_back(text_block(BlockKind::Caption, "cap"));
    std::string html = to_html(doc_with(std::move(table)));
    CHECK(html ==
          "<html><body><figure><table><tr><td>x</td></tr></table>"
          "<figcaption>cap</figcaption></figure></body></html>");
  }
  SUBCASE("two pages produce two page containers in order") {
    Document doc;
    doc.pages.push_back({text_block(BlockKind::Text, "a")});
    doc.pages.push_back({text_block(BlockKind::Text, "b")});
    CHECK(to_html(doc) ==
          "<html><body><div class=\"page\"><p>a</p></div>"
          "<div class=\"page\"><p>b</p></div></body></html>");
  }
  SUBCASE("loc boxes surface as data attributes") {
    Block block = text_block(BlockKind::Text, "x");
    block.loc = LocBox{1, 2, 3, 4};
    CHECK(to_html(doc_with(std::move(block))) ==
          "<html><body><p data-loc=\"1,2,3,4\">x</p></body></html>");
  }
  SUBCASE("text is escaped") {
    Block block = text_block(BlockKind::Text, "a < b");
    CHECK(to_html(doc_with(std::move(block))) ==
          "<html><body><p>a &lt; b</p></body></html>");
  }
}

TEST_CASE("json round-trip is exact") {
  SUBCASE("random documents") {
    testgen::Rng rng(90210);
    testgen::DocumentOptions opts;
    opts.allow_nested_table_in_picture = true;
    for (int i = 0; i < 200; ++i) {
      Document doc = testgen::random_document(rng, opts);
      FromJsonResult back = from_json(to_json(doc));
      REQUIRE(back.document);
      REQUIRE(*back.document == doc);
    }
  }
  SUBCASE("a document exercising all fifteen kinds") {
    std::string src =
        "<doctag>"
        "<title>T</title>"
        "<section_header>S</section_header>"
        "<text>body</text>"
        "<caption>c</caption>"
        "<footnote>f</footnote>"
        "<formula>x^{2}</formula>"
        "<page_header>ph</page_header>"
        "<page_footer>pf</page_footer>"
        "<code><_Python_>print(1)</code>"
        "<picture><logo><caption>pc</caption></picture>"
        "<otsl><loc_1><loc_2><loc_3><loc_4><ched>h<fcel>v<nl><caption>tc</caption></otsl>"
        "<document_index>Intro 1</document_index>"
        "<ordered_list><list_item>one</list_item></ordered_list>"
        "<unordered_list><list_item>two</list_item></unordered_list>"
        "<page_break>"
        "<text>page two</text>"
        "</doctag>";
    auto parsed = parse(src, ParseMode::Strict);
    REQUIRE(parsed.document);
    REQUIRE(!has_errors(parsed.diagnostics));
    CHECK(validate(*parsed.document).empty());
    FromJsonResult back = from_json(to_json(*parsed.document));
    REQUIRE(back.document);
    CHECK(*back.document == *parsed.document);
    // And the serialized form round-trips too.
    CHECK(serialize(*back.document) == src);
  }
}

TEST_CASE("from_json rejects bad payloads") {
  SUBCASE("wrong schema version") {
    FromJsonResult r = from_json(R"({"schema_version": 99, "pages": []})");
    CHECK(!r.document);
    REQUIRE(!r.diagnostics.empty());
    CHECK(r.diagnostics[0].code == "schema-version-unsupported");
  }
  SUBCASE("not json at all") {
    FromJsonResult r = from_json("nonsense");
    CHECK(!r.document);
    CHECK(r.diagnostics[0].code == "json-malformed");
  }
  SUBCASE("invariant-violating payload") {
    FromJsonResult r = from_json(R"({
      "schema_version": 1,
      "pages": [{"blocks": [{"kind": "text", "loc": [400, 10, 100, 20]}]}]
    })");
    CHECK(!r.document);
    CHECK(!r.diagnostics.empty());
  }
  SUBCASE("unknown kind") {
    FromJsonResult r = from_json(R"({
      "schema_version": 1,
      "pages": [{"blocks": [{"kind": "banner"}]}]
    })");
    CHECK(!r.document);
    CHECK(r.diagnostics[0].code == "json-invalid-payload");
  }
}
