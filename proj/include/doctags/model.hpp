#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "doctags/diagnostics.hpp"
#include "doctags/otsl.hpp"

namespace doctags {

/// The fifteen document block types. Parsing any other element name is
/// an error in strict mode and a diagnostic in lenient mode.
enum class BlockKind {
  Text,
  Caption,
  Footnote,
  Formula,
  Title,
  ListItem,
  PageFooter,
  PageHeader,
  Picture,
  SectionHeader,
  DocumentIndex,
  Code,
  Otsl,
  OrderedList,
  UnorderedList,
};

inline constexpr int kBlockKindCount = 15;

const char* block_kind_name(BlockKind kind);
std::optional<BlockKind> block_kind_from_name(std::string_view name);
std::span<const BlockKind> all_block_kinds();

/// Programming-language classification carried by code blocks,
/// serialized as <_name_>. Unrecognized names map to Unknown with a
/// diagnostic.
enum class CodeLang {
  Ada, Awk, Bash, Bc, C, CSharp, Cpp, CMake, Cobol, Css, Ceylon, Clojure,
  Crystal, Cuda, Cython, D, Dart, Dc, Dockerfile, Elixir, Erlang, Fortran,
  Forth, Go, Html, Haskell, Haxe, Java, JavaScript, Julia, Kotlin, Lisp,
  Lua, Matlab, MoonScript, Nim, OCaml, ObjectiveC, Octave, Php, Pascal,
  Perl, Prolog, Python, Racket, Ruby, Rust, Sml, Sql, Scala, Scheme,
  Swift, TypeScript, Unknown, VisualBasic, Xml, Yaml,
};

inline constexpr int kCodeLangCount = 57;

const char* code_lang_name(CodeLang lang);
std::optional<CodeLang> code_lang_from_name(std::string_view name);  // exact, case-sensitive
std::span<const CodeLang> all_code_langs();

/// Image categories carried by picture blocks as standalone tags.
enum class PictureClass {
  NaturalImage, PieChart, BarChart, LineChart, FlowChart, ScatterChart,
  Heatmap, RemoteSensing, ChemistryMolecularStructure,
  ChemistryMarkushStructure, Icon, Logo, Signature, Stamp, QrCode,
  BarCode, Screenshot, Map, StratigraphicChart, CadDrawing,
  ElectricalDiagram,
};

inline constexpr int kPictureClassCount = 21;

const char* picture_class_name(PictureClass cls);
std::optional<PictureClass> picture_class_from_name(std::string_view name);
std::span<const PictureClass> all_picture_classes();

/// Bounding box on the fixed 0..500 page grid that maps proportionally
/// to page width and height.
struct LocBox {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  bool valid() const;

  bool operator==(const LocBox&) const = default;
};

inline constexpr int kLocGridMax = 500;

struct Block {
  BlockKind kind = BlockKind::Text;
  std::optional<LocBox> loc;
  std::string text;
  std::vector<Block> children;
  std::optional<CodeLang> code_lang;           // kind == Code only
  std::vector<PictureClass> picture_classes;   // kind == Picture only
  std::optional<TableGrid> table;              // required for Otsl, optional for DocumentIndex

  bool operator==(const Block&) const = default;
};

using Page = std::vector<Block>;

struct Document {
  std::vector<Page> pages;

  /// One page, zero blocks — the smallest valid document.
  static Document empty();

  bool operator==(const Document&) const = default;
};

// Format-level tag names that are not block kinds.
inline constexpr std::string_view kRootTag = "doctag";
inline constexpr std::string_view kPageBreakTag = "page_break";
inline constexpr std::string_view kLocPrefix = "loc_";

/// True for any vocabulary tag name: block kinds, doctag, page_break,
/// loc_N, cell tags, picture classes, and _lang_ code-language tags.
bool is_known_tag_name(std::string_view name);

/// True when `name` has the lexical shape of a tag name (lowercase
/// word, or _..._ code-language form) whether or not it is known.
bool looks_like_tag_name(std::string_view name);

/// Scans text content for <...> spans that would lex as markup when the
/// document is serialized. With known_only, only vocabulary tags count;
/// otherwise any tag-shaped candidate does.
bool text_embeds_markup(std::string_view text, bool known_only);

/// Which child kinds `parent` may hold. `nested` marks a parent that is
/// itself a child block (an otsl under a picture holds nothing, keeping
/// the tree within its two-level depth bound).
bool can_contain(BlockKind parent, BlockKind child, bool nested);

/// Checks every model invariant and returns one diagnostic per
/// violation, with block paths; empty means the document is valid and
/// serializable. Severity is Error for all findings.
std::vector<Diagnostic> validate(const Document& doc);

}  // namespace doctags
