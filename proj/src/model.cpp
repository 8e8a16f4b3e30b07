#include "doctags/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>

#include "doctags/strings.hpp"

namespace doctags {

const char* severity_name(Severity severity) {
  switch (severity) {
    case Severity::Info: return "info";
    case Severity::Warning: return "warning";
    case Severity::Error: return "error";
  }
  return "unknown";
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::size_t count_severity(const std::vector<Diagnostic>& diags, Severity severity) {
  return static_cast<std::size_t>(std::count_if(
      diags.begin(), diags.end(),
      [severity](const Diagnostic& d) { return d.severity == severity; }));
}

namespace {

constexpr std::array<BlockKind, kBlockKindCount> kAllBlockKinds = {
    BlockKind::Text,          BlockKind::Caption,      BlockKind::Footnote,
    BlockKind::Formula,       BlockKind::Title,        BlockKind::ListItem,
    BlockKind::PageFooter,    BlockKind::PageHeader,   BlockKind::Picture,
    BlockKind::SectionHeader, BlockKind::DocumentIndex, BlockKind::Code,
    BlockKind::Otsl,          BlockKind::OrderedList,  BlockKind::UnorderedList,
};

constexpr const char* kBlockKindNames[kBlockKindCount] = {
    "text",           "caption",       "footnote",  "formula",
    "title",          "list_item",     "page_footer", "page_header",
    "picture",        "section_header", "document_index", "code",
    "otsl",           "ordered_list",  "unordered_list",
};

constexpr std::array<CodeLang, kCodeLangCount> kAllCodeLangs = {
    CodeLang::Ada,        CodeLang::Awk,        CodeLang::Bash,
    CodeLang::Bc,         CodeLang::C,          CodeLang::CSharp,
    CodeLang::Cpp,        CodeLang::CMake,      CodeLang::Cobol,
    CodeLang::Css,        CodeLang::Ceylon,     CodeLang::Clojure,
    CodeLang::Crystal,    CodeLang::Cuda,       CodeLang::Cython,
    CodeLang::D,          CodeLang::Dart,       CodeLang::Dc,
    CodeLang::Dockerfile, CodeLang::Elixir,     CodeLang::Erlang,
    CodeLang::Fortran,    CodeLang::Forth,      CodeLang::Go,
    CodeLang::Html,       CodeLang::Haskell,    CodeLang::Haxe,
    CodeLang::Java,       CodeLang::JavaScript, CodeLang::Julia,
    CodeLang::Kotlin,     CodeLang::Lisp,       CodeLang::Lua,
    CodeLang::Matlab,     CodeLang::MoonScript, CodeLang::Nim,
    CodeLang::OCaml,      CodeLang::ObjectiveC, CodeLang::Octave,
    CodeLang::Php,        CodeLang::Pascal,     CodeLang::Perl,
    CodeLang::Prolog,     CodeLang::Python,     CodeLang::Racket,
    CodeLang::Ruby,       CodeLang::Rust,       CodeLang::Sml,
    CodeLang::Sql,        CodeLang::Scala,      CodeLang::Scheme,
    CodeLang::Swift,      CodeLang::TypeScript, CodeLang::Unknown,
    CodeLang::VisualBasic, CodeLang::Xml,       CodeLang::Yaml,
};

constexpr const char* kCodeLangNames[kCodeLangCount] = {
    "Ada",        "Awk",        "Bash",    "bc",      "C",          "C#",
    "C++",        "CMake",      "COBOL",   "CSS",     "Ceylon",     "Clojure",
    "Crystal",    "Cuda",       "Cython",  "D",       "Dart",       "dc",
    "Dockerfile", "Elixir",     "Erlang",  "FORTRAN", "Forth",      "Go",
    "HTML",       "Haskell",    "Haxe",    "Java",    "JavaScript", "Julia",
    "Kotlin",     "Lisp",       "Lua",     "Matlab",  "MoonScript", "Nim",
    "OCaml",      "ObjectiveC", "Octave",  "PHP",     "Pascal",     "Perl",
    "Prolog",     "Python",     "Racket",  "Ruby",    "Rust",       "SML",
    "SQL",        "Scala",      "Scheme",  "Swift",   "TypeScript", "unknown",
    "VisualBasic", "XML",       "YAML",
};

constexpr std::array<PictureClass, kPictureClassCount> kAllPictureClasses = {
    PictureClass::NaturalImage,
    PictureClass::PieChart,
    PictureClass::BarChart,
    PictureClass::LineChart,
    PictureClass::FlowChart,
    PictureClass::ScatterChart,
    PictureClass::Heatmap,
    PictureClass::RemoteSensing,
    PictureClass::ChemistryMolecularStructure,
    PictureClass::ChemistryMarkushStructure,
    PictureClass::Icon,
    PictureClass::Logo,
    PictureClass::Signature,
    PictureClass::Stamp,
    PictureClass::QrCode,
    PictureClass::BarCode,
    PictureClass::Screenshot,
    PictureClass::Map,
    PictureClass::StratigraphicChart,
    PictureClass::CadDrawing,
    PictureClass::ElectricalDiagram,
};

constexpr const char* kPictureClassNames[kPictureClassCount] = {
    "natural_image",
    "pie_chart",
    "bar_chart",
    "line_chart",
    "flow_chart",
    "scatter_chart",
    "heatmap",
    "remote_sensing",
    "chemistry_molecular_structure",
    "chemistry_markush_structure",
    "icon",
    "logo",
    "signature",
    "stamp",
    "qr_code",
    "bar_code",
    "screenshot",
    "map",
    "stratigraphic_chart",
    "cad_drawing",
    "electrical_diagram",
};

}  // namespace

const char* block_kind_name(BlockKind kind) {
  return kBlockKindNames[static_cast<int>(kind)];
}

std::optional<BlockKind> block_kind_from_name(std::string_view name) {
  for (int i = 0; i < kBlockKindCount; ++i) {
    if (name == kBlockKindNames[i]) return kAllBlockKinds[static_cast<std::size_t>(i)];
  }
  return std::nullopt;
}

std::span<const BlockKind> all_block_kinds() { return kAllBlockKinds; }

const char* code_lang_name(CodeLang lang) {
  return kCodeLangNames[static_cast<int>(lang)];
}

std::optional<CodeLang> code_lang_from_name(std::string_view name) {
  for (int i = 0; i < kCodeLangCount; ++i) {
    if (name == kCodeLangNames[i]) return kAllCodeLangs[static_cast<std::size_t>(i)];
  }
  return std::nullopt;
}

std::span<const CodeLang> all_code_langs() { return kAllCodeLangs; }

const char* picture_class_name(PictureClass cls) {
  return kPictureClassNames[static_cast<int>(cls)];
}

std::optional<PictureClass> picture_class_from_name(std::string_view name) {
  for (int i = 0; i < kPictureClassCount; ++i) {
    if (name == kPictureClassNames[i]) return kAllPictureClasses[static_cast<std::size_t>(i)];
  }
  return std::nullopt;
}

std::span<const PictureClass> all_picture_classes() { return kAllPictureClasses; }

bool LocBox::valid() const {
  return 0 <= x1 && x1 <= x2 && x2 <= kLocGridMax && 0 <= y1 && y1 <= y2 && y2 <= kLocGridMax;
}

Document Document::empty() {
  Document doc;
  doc.pages.emplace_back();
  return doc;
}

namespace {

bool is_loc_name(std::string_view name) {
  if (!name.starts_with(kLocPrefix)) return false;
  std::string_view digits = name.substr(kLocPrefix.size());
  if (digits.empty()) return false;
  return std::all_of(digits.begin(), digits.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool is_lang_tag_shape(std::string_view name) {
  // <_name_> code-language form; the interior may hold C++/C#-style names.
  if (name.size() < 3 || name.front() != '_' || name.back() != '_') return false;
  std::string_view inner = name.substr(1, name.size() - 2);
  if (inner.empty()) return false;
  return std::all_of(inner.begin(), inner.end(), [](unsigned char c) {
    return std::isalnum(c) != 0 || c == '+' || c == '#';
  });
}

bool is_word_tag_shape(std::string_view name) {
  if (name.empty()) return false;
  unsigned char first = static_cast<unsigned char>(name.front());
  if (!(std::islower(first) || first == '_')) return false;
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::islower(c) || std::isdigit(c) || c == '_';
  });
}

}  // namespace

bool is_known_tag_name(std::string_view name) {
  if (name == kRootTag || name == kPageBreakTag) return true;
  if (is_loc_name(name)) return true;
  if (block_kind_from_name(name)) return true;
  if (cell_tag_from_name(name)) return true;
  if (picture_class_from_name(name)) return true;
  if (is_lang_tag_shape(name)) {
    std::string_view inner = name.substr(1, name.size() - 2);
    return code_lang_from_name(inner).has_value();
  }
  return false;
}

bool looks_like_tag_name(std::string_view name) {
  return is_word_tag_shape(name) || is_lang_tag_shape(name);
}

bool text_embeds_markup(std::string_view text, bool known_only) {
  constexpr std::size_t kMaxNameLen = 40;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '<') continue;
    std::size_t start = i + 1;
    bool closing = start < text.size() && text[start] == '/';
    if (closing) ++start;
    std::size_t close = text.find('>', start);
    if (close == std::string_view::npos) continue;
    if (close - start == 0 || close - start > kMaxNameLen) continue;
    std::string_view name = text.substr(start, close - start);
    if (!looks_like_tag_name(name)) continue;
    if (!known_only) return true;
    // Mirrors the lexer: only wrapping tags consume in closing form, so
    // "</loc_5>" is inert text while "</text>" is live markup.
    bool consumes = closing ? (name == kRootTag || block_kind_from_name(name).has_value())
                            : is_known_tag_name(name);
    if (consumes) return true;
  }
  return false;
}

bool can_contain(BlockKind parent, BlockKind child, bool nested) {
  if (nested) return false;
  switch (parent) {
    case BlockKind::Picture:
      return child == BlockKind::Caption || child == BlockKind::Otsl;
    case BlockKind::Otsl:
      return child == BlockKind::Caption;
    case BlockKind::OrderedList:
    case BlockKind::UnorderedList:
      return child == BlockKind::ListItem;
    default:
      return false;
  }
}

namespace {

std::string child_path(const std::string& base, std::size_t index) {
  return base + "/" + std::to_string(index);
}

struct Validator {
  std::vector<Diagnostic> diags;

  void report(std::string code, std::string message, std::string path) {
    diags.push_back(make_diag(Severity::Error, std::move(code), std::move(message), {}, std::move(path)));
  }

  void check_text_content(const Block& block, const std::string& path) {
    bool verbatim = block.kind == BlockKind::Code || block.kind == BlockKind::Formula;
    if (!verbatim && trim_ws(block.text) != block.text) {
      report("text-untrimmed", "text content carries leading or trailing whitespace", path);
    }
    if (text_embeds_markup(block.text, /*known_only=*/verbatim)) {
      report("text-embeds-markup",
             "text content contains a sequence that lexes as a markup tag", path);
    }
  }

  void check_block(const Block& block, const std::string& path, bool nested) {
    if (block.loc && !block.loc->valid()) {
      const LocBox& l = *block.loc;
      bool out_of_range = l.x1 < 0 || l.y1 < 0 || l.x2 > kLocGridMax || l.y2 > kLocGridMax ||
                          l.x1 > kLocGridMax || l.y1 > kLocGridMax || l.x2 < 0 || l.y2 < 0;
      if (out_of_range) {
        report("loc-out-of-range", "bounding box coordinate outside the 0..500 grid", path);
      }
      if (l.x1 > l.x2 || l.y1 > l.y2) {
        report("loc-inverted", "bounding box corners are not ordered (x1<=x2, y1<=y2)", path);
      }
    }

    if (block.code_lang && block.kind != BlockKind::Code) {
      report("code-lang-misplaced", "code language set on a non-code block", path);
    }
    if (!block.picture_classes.empty() && block.kind != BlockKind::Picture) {
      report("picture-class-misplaced", "picture classes set on a non-picture block", path);
    }

    if (block.kind == BlockKind::Otsl && !block.table) {
      report("table-missing", "otsl block has no table grid", path);
    }
    if (block.table && block.kind != BlockKind::Otsl && block.kind != BlockKind::DocumentIndex) {
      report("table-misplaced", "table grid set on a block that does not hold one", path);
    }
    if (block.table) {
      for (Diagnostic d : validate_grid(*block.table)) {
        d.block_path = path;
        diags.push_back(std::move(d));
      }
    }

    bool structural = block.kind == BlockKind::Otsl || block.kind == BlockKind::Picture ||
                      block.kind == BlockKind::OrderedList || block.kind == BlockKind::UnorderedList;
    if (structural && !block.text.empty()) {
      report("unexpected-text", "structural block carries direct text content", path);
    }
    if (block.kind == BlockKind::DocumentIndex && block.table && !block.text.empty()) {
      report("unexpected-text", "document_index holds both a grid and text content", path);
    }
    check_text_content(block, path);

    for (std::size_t i = 0; i < block.children.size(); ++i) {
      const Block& child = block.children[i];
      std::string cpath = child_path(path, i);
      if (!can_contain(block.kind, child.kind, nested)) {
        if (child.kind == BlockKind::Caption) {
          report("caption-misplaced", "caption nested under a block that cannot hold one", cpath);
        } else if ((block.kind == BlockKind::OrderedList || block.kind == BlockKind::UnorderedList) &&
                   child.kind != BlockKind::ListItem) {
          report("list-child-invalid", "lists may only hold list_item children", cpath);
        } else if (nested) {
          report("depth-exceeded", "block nests deeper than the two-level bound", cpath);
        } else {
          report("child-invalid",
                 std::string(block_kind_name(child.kind)) + " cannot nest under " +
                     block_kind_name(block.kind),
                 cpath);
        }
      }
      check_block(child, cpath, /*nested=*/true);
    }
  }
};

}  // namespace

std::vector<Diagnostic> validate(const Document& doc) {
  Validator v;
  if (doc.pages.empty()) {
    v.report("no-pages", "document holds no pages (the empty document has one empty page)", "");
    return std::move(v.diags);
  }
  for (std::size_t p = 0; p < doc.pages.size(); ++p) {
    const Page& page = doc.pages[p];
    for (std::size_t b = 0; b < page.size(); ++b) {
      const Block& block = page[b];
      std::string path = std::to_string(p) + "/" + std::to_string(b);
      if (block.kind == BlockKind::ListItem) {
        v.report("list-item-orphan", "list_item outside ordered_list/unordered_list", path);
      }
      v.check_block(block, path, /*nested=*/false);
    }
  }
  return std::move(v.diags);
}

}  // namespace doctags
