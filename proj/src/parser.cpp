#include "doctags/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>
#include <utility>

#include "doctags/strings.hpp"

namespace doctags {

bool same_token(const Token& a, const Token& b) {
  return a.kind == b.kind && a.name == b.name && a.loc_value == b.loc_value && a.text == b.text &&
         a.from_unknown_tag == b.from_unknown_tag;
}

namespace {

constexpr std::size_t kMaxTagNameLen = 40;

bool is_name_char(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || c == '_' || c == '+' || c == '#';
}

std::optional<int> parse_loc_payload(std::string_view name) {
  if (!name.starts_with(kLocPrefix)) return std::nullopt;
  std::string_view digits = name.substr(kLocPrefix.size());
  if (digits.empty() || digits.size() > 9) return std::nullopt;
  if (!std::all_of(digits.begin(), digits.end(),
                   [](unsigned char c) { return std::isdigit(c) != 0; })) {
    return std::nullopt;
  }
  int value = 0;
  std::from_chars(digits.data(), digits.data() + digits.size(), value);
  return value;
}

bool is_lang_tag(std::string_view name) {
  return name.size() >= 3 && name.front() == '_' && name.back() == '_';
}

}  // namespace

TokenizeResult tokenize(std::string_view source) {
  TokenizeResult result;
  std::vector<Token>& tokens = result.tokens;

  auto emit_text = [&tokens](std::size_t begin, std::size_t end, std::string_view run) {
    if (begin == end) return;
    // Merge into a preceding plain text run so runs stay maximal.
    if (!tokens.empty() && tokens.back().kind == TokenKind::Text &&
        !tokens.back().from_unknown_tag && tokens.back().span.end == begin) {
      tokens.back().text += run;
      tokens.back().span.end = end;
      return;
    }
    Token t;
    t.kind = TokenKind::Text;
    t.text = std::string(run);
    t.span = {begin, end};
    tokens.push_back(std::move(t));
  };

  std::size_t i = 0;
  while (i < source.size()) {
    if (source[i] != '<') {
      std::size_t next = source.find('<', i);
      if (next == std::string_view::npos) next = source.size();
      emit_text(i, next, source.substr(i, next - i));
      i = next;
      continue;
    }

    // Candidate tag: "<" [/] name ">" with name in the tag charset.
    std::size_t j = i + 1;
    bool closing = j < source.size() && source[j] == '/';
    if (closing) ++j;
    std::size_t name_begin = j;
    while (j < source.size() && j - name_begin <= kMaxTagNameLen && is_name_char(source[j])) ++j;
    bool candidate = j < source.size() && source[j] == '>' && j > name_begin &&
                     j - name_begin <= kMaxTagNameLen;
    std::string_view name = candidate ? source.substr(name_begin, j - name_begin) : std::string_view();
    if (!candidate || !looks_like_tag_name(name)) {
      // Not markup at all: the '<' is ordinary text.
      emit_text(i, i + 1, source.substr(i, 1));
      ++i;
      continue;
    }

    std::size_t tag_end = j + 1;
    SourceSpan span{i, tag_end};

    // Only wrapping tags have a closing form; </fcel> and friends are
    // as unknown as any made-up name.
    bool known = closing ? (name == kRootTag || block_kind_from_name(name).has_value())
                         : (is_known_tag_name(name) || is_lang_tag(name));
    if (!known) {
      result.diagnostics.push_back(make_diag(
          Severity::Warning, "unknown-tag",
          "unknown tag <" + std::string(source.substr(i + 1, tag_end - i - 2)) + "> kept as text",
          span));
      Token t;
      t.kind = TokenKind::Text;
      t.text = std::string(source.substr(i, tag_end - i));
      t.span = span;
      t.from_unknown_tag = true;
      tokens.push_back(std::move(t));
      i = tag_end;
      continue;
    }

    Token t;
    t.span = span;
    t.name = std::string(name);
    if (closing) {
      t.kind = TokenKind::Close;
    } else if (auto loc = parse_loc_payload(name)) {
      t.kind = TokenKind::Standalone;
      int value = *loc;
      if (value > kLocGridMax) {
        result.diagnostics.push_back(make_diag(Severity::Warning, "loc-out-of-range",
                                               "loc payload " + std::to_string(value) +
                                                   " clamped to " + std::to_string(kLocGridMax),
                                               span));
        value = kLocGridMax;
      }
      t.loc_value = value;
    } else if (name == kPageBreakTag || cell_tag_from_name(name) ||
               picture_class_from_name(name)) {
      t.kind = TokenKind::Standalone;
    } else if (is_lang_tag(name)) {
      t.kind = TokenKind::Standalone;
      std::string_view inner = name.substr(1, name.size() - 2);
      if (!code_lang_from_name(inner)) {
        result.diagnostics.push_back(make_diag(
            Severity::Warning, "code-lang-unknown",
            "unrecognized programming language \"" + std::string(inner) + "\"", span));
      }
    } else {
      t.kind = TokenKind::Open;  // block kind or doctag root
    }
    tokens.push_back(std::move(t));
    i = tag_end;
  }
  return result;
}

std::optional<std::size_t> detect_repetition(std::span<const Token> tokens, int min_repeats,
                                             int max_period) {
  if (min_repeats < 2 || max_period < 1) return std::nullopt;
  const std::size_t n = tokens.size();
  if (n < static_cast<std::size_t>(min_repeats)) return std::nullopt;

  // Z-array over the reversed stream: z[k] = length of the longest match
  // between the reversed stream and its suffix starting at k. A suffix of
  // the original stream of length L is periodic with period p iff
  // L <= p + z[p].
  auto rev = [&tokens, n](std::size_t k) -> const Token& { return tokens[n - 1 - k]; };
  std::vector<std::size_t> z(n, 0);
  z[0] = n;
  std::size_t l = 0, r = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (k < r) z[k] = std::min(r - k, z[k - l]);
    while (k + z[k] < n && same_token(rev(z[k]), rev(k + z[k]))) ++z[k];
    if (k + z[k] > r) {
      l = k;
      r = k + z[k];
    }
  }

  std::size_t best_start = n;
  std::size_t best_period = 0;
  std::size_t period_cap = std::min<std::size_t>(static_cast<std::size_t>(max_period), n - 1);
  for (std::size_t p = 1; p <= period_cap; ++p) {
    std::size_t maxlen = std::min(n, p + z[p]);
    std::size_t length = (maxlen / p) * p;
    if (length / p < static_cast<std::size_t>(min_repeats)) continue;
    std::size_t start = n - length;
    if (start < best_start || (start == best_start && p < best_period)) {
      best_start = start;
      best_period = p;
    }
  }
  if (best_period == 0) return std::nullopt;
  return best_start + best_period;
}

namespace {

bool is_verbatim(BlockKind kind) {
  return kind == BlockKind::Code || kind == BlockKind::Formula;
}

bool holds_cells(BlockKind kind) {
  return kind == BlockKind::Otsl || kind == BlockKind::DocumentIndex;
}

struct Builder {
  BlockKind kind;
  Block block;
  std::vector<int> loc_run;
  bool loc_closed = false;  // content arrived; later locs are misplaced
  std::string text;
  std::vector<OtslToken> cells;
  bool has_cells = false;
  bool implicit = false;  // synthesized wrapper (orphan list items)
  SourceSpan open_span;
};

struct Engine {
  ParseMode mode;
  std::string_view src;
  std::vector<Diagnostic> diags;
  Document doc;
  std::vector<Builder> stack;
  bool root_seen = false;
  bool root_closed = false;
  bool started = false;            // any meaningful token processed
  bool trailing_reported = false;

  explicit Engine(ParseMode m, std::string_view s) : mode(m), src(s) {
    doc.pages.emplace_back();
  }

  // A repair: warning in lenient mode, error in strict mode.
  void repair(std::string code, std::string message, SourceSpan span) {
    Severity sev = mode == ParseMode::Strict ? Severity::Error : Severity::Warning;
    diags.push_back(make_diag(sev, std::move(code), std::move(message), span));
  }

  void info(std::string code, std::string message, SourceSpan span) {
    diags.push_back(make_diag(Severity::Info, std::move(code), std::move(message), span));
  }

  Page& page() { return doc.pages.back(); }

  // Returns true when the token was consumed as the opening root tag.
  bool note_started(const Token& t) {
    if (started) return false;
    if (t.kind == TokenKind::Text && !t.from_unknown_tag && is_blank(t.text)) return false;
    started = true;
    if (t.kind == TokenKind::Open && t.name == kRootTag) {
      root_seen = true;
      return true;
    }
    repair("missing-root", "input does not start with <doctag>", t.span);
    return false;
  }

  void check_trailing(const Token& t) {
    if (!root_closed || trailing_reported) return;
    if (t.kind == TokenKind::Text && !t.from_unknown_tag && is_blank(t.text)) return;
    trailing_reported = true;
    repair("trailing-content", "content continues after </doctag>", t.span);
  }

  void attach_cell_text(Builder& b, std::string_view raw) {
    if (b.cells.empty()) {
      b.text += raw;  // payload or stray text, resolved at close
      return;
    }
    OtslToken& last = b.cells.back();
    if (last.text) {
      *last.text += raw;
    } else if (!is_blank(raw)) {
      last.text = std::string(raw);
    }
  }

  // A dropped token separated two text runs in the source. Leave a
  // space in its place: otherwise the neighboring fragments could fuse
  // into a tag-shaped sequence that no longer round-trips as text.
  void note_drop() {
    if (stack.empty()) return;
    Builder& top = stack.back();
    if (holds_cells(top.kind) && !top.cells.empty()) {
      OtslToken& last = top.cells.back();
      if (last.text && !last.text->empty() && !is_ascii_ws(last.text->back())) {
        *last.text += ' ';
      }
      return;
    }
    if (!top.text.empty() && !is_ascii_ws(top.text.back())) top.text += ' ';
  }

  void on_text(const Token& t) {
    if (t.from_unknown_tag) {
      if (!stack.empty() && is_verbatim(stack.back().kind)) {
        stack.back().text += t.text;  // verbatim content, not markup
        return;
      }
      check_trailing(t);
      repair("unknown-tag", "unknown tag " + t.text + " dropped", t.span);
      note_drop();
      return;
    }
    if (stack.empty()) {
      if (is_blank(t.text)) return;
      check_trailing(t);
      repair("untagged-text", "text outside any block wrapped in an implicit text block", t.span);
      Block implicit;
      implicit.kind = BlockKind::Text;
      implicit.text = std::string(trim_ws(t.text));
      page().push_back(std::move(implicit));
      return;
    }
    Builder& top = stack.back();
    if (holds_cells(top.kind) && (top.has_cells || top.kind == BlockKind::Otsl)) {
      attach_cell_text(top, t.text);
      if (!is_blank(t.text)) top.loc_closed = true;
      return;
    }
    if (is_verbatim(top.kind)) {
      top.text += t.text;
      top.loc_closed = true;
      return;
    }
    if (top.kind == BlockKind::OrderedList || top.kind == BlockKind::UnorderedList) {
      if (is_blank(t.text)) return;
      repair("untagged-text", "text inside a list wrapped in an implicit list_item", t.span);
      Block item;
      item.kind = BlockKind::ListItem;
      item.text = std::string(trim_ws(t.text));
      top.block.children.push_back(std::move(item));
      top.loc_closed = true;
      return;
    }
    if (top.kind == BlockKind::Picture) {
      if (is_blank(t.text)) return;
      repair("untagged-text", "text inside a picture block dropped", t.span);
      return;
    }
    top.text += t.text;
    if (!is_blank(t.text)) top.loc_closed = true;
  }

  void on_loc(const Token& t) {
    if (stack.empty()) {
      check_trailing(t);
      repair("loc-misplaced", "loc tag outside any block", t.span);
      return;
    }
    Builder& top = stack.back();
    if (top.loc_closed || top.block.loc || top.loc_run.size() >= 4) {
      repair("loc-misplaced", "loc tag after block content or a complete box", t.span);
      note_drop();
      return;
    }
    top.loc_run.push_back(*t.loc_value);
    if (top.loc_run.size() == 4) {
      LocBox box{top.loc_run[0], top.loc_run[1], top.loc_run[2], top.loc_run[3]};
      if (box.x1 > box.x2 || box.y1 > box.y2) {
        repair("loc-inverted", "bounding box corners swapped into order", t.span);
        if (box.x1 > box.x2) std::swap(box.x1, box.x2);
        if (box.y1 > box.y2) std::swap(box.y1, box.y2);
      }
      top.block.loc = box;
      top.loc_run.clear();
    }
  }

  void on_cell(const Token& t) {
    CellTag tag = *cell_tag_from_name(t.name);
    if (stack.empty() || !holds_cells(stack.back().kind)) {
      check_trailing(t);
      repair("misplaced-tag", "table cell tag <" + t.name + "> outside a table block", t.span);
      note_drop();
      return;
    }
    Builder& top = stack.back();
    top.cells.push_back(OtslToken{tag, std::nullopt});
    top.has_cells = true;
    top.loc_closed = true;
  }

  void on_picture_class(const Token& t) {
    if (stack.empty() || stack.back().kind != BlockKind::Picture) {
      check_trailing(t);
      repair("misplaced-tag", "picture class tag <" + t.name + "> outside a picture block",
             t.span);
      note_drop();
      return;
    }
    stack.back().block.picture_classes.push_back(*picture_class_from_name(t.name));
    stack.back().loc_closed = true;
  }

  void on_lang(const Token& t) {
    if (stack.empty() || stack.back().kind != BlockKind::Code) {
      check_trailing(t);
      repair("misplaced-tag", "language tag <" + t.name + "> outside a code block", t.span);
      note_drop();
      return;
    }
    Builder& top = stack.back();
    if (top.block.code_lang) {
      repair("misplaced-tag", "duplicate language tag <" + t.name + ">", t.span);
      note_drop();
      return;
    }
    std::string_view inner = std::string_view(t.name).substr(1, t.name.size() - 2);
    auto lang = code_lang_from_name(inner);
    top.block.code_lang = lang.value_or(CodeLang::Unknown);
    top.loc_closed = true;
    note_drop();  // the tag may sit between content runs
  }

  void on_page_break(const Token& t) {
    check_trailing(t);
    close_all("page break inside an open block", t.span);
    doc.pages.emplace_back();
  }

  void on_open(const Token& t) {
    if (t.name == kRootTag) {
      if (!root_seen) {
        root_seen = true;
      } else {
        repair("misplaced-tag", "nested <doctag> ignored", t.span);
      }
      note_drop();  // consumed either way; keep the text boundary
      return;
    }
    check_trailing(t);
    auto kind_lookup = block_kind_from_name(t.name);
    if (!kind_lookup) {
      repair("misplaced-tag", "<" + t.name + "> cannot open a block", t.span);
      return;
    }
    BlockKind kind = *kind_lookup;

    // Auto-close open blocks until one can hold this kind.
    while (!stack.empty() && !can_contain(stack.back().kind, kind, stack.size() > 1)) {
      auto_close(t.span);
    }
    if (!stack.empty()) stack.back().loc_closed = true;

    if (stack.empty() && kind == BlockKind::ListItem) {
      repair("orphan-list-item", "list_item outside a list wrapped in an implicit unordered_list",
             t.span);
      Builder wrap;
      wrap.kind = BlockKind::UnorderedList;
      wrap.block.kind = BlockKind::UnorderedList;
      wrap.implicit = true;
      wrap.open_span = t.span;
      stack.push_back(std::move(wrap));
    }
    if (!stack.empty() && stack.back().kind == BlockKind::Picture && kind == BlockKind::Otsl) {
      info("picture-nests-table", "picture block carries a nested table payload", t.span);
    }

    Builder b;
    b.kind = kind;
    b.block.kind = kind;
    b.open_span = t.span;
    stack.push_back(std::move(b));
  }

  void on_close(const Token& t) {
    if (t.name == kRootTag) {
      if (!stack.empty()) {
        close_all("block left open at </doctag>", t.span);
      }
      if (root_seen && !root_closed) {
        root_closed = true;
      } else {
        repair("stray-close", "</doctag> without a matching open", t.span);
      }
      return;
    }
    auto kind_lookup = block_kind_from_name(t.name);
    if (!kind_lookup) {
      repair("stray-close", "</" + t.name + "> without a matching open tag", t.span);
      note_drop();
      return;
    }
    BlockKind kind = *kind_lookup;
    // Find the nearest matching open block; cascade-close anything above.
    int match = -1;
    for (int i = static_cast<int>(stack.size()) - 1; i >= 0; --i) {
      if (stack[static_cast<std::size_t>(i)].kind == kind &&
          !stack[static_cast<std::size_t>(i)].implicit) {
        match = i;
        break;
      }
    }
    if (match < 0) {
      repair("stray-close", "</" + t.name + "> without a matching open tag", t.span);
      note_drop();
      return;
    }
    while (static_cast<int>(stack.size()) > match + 1) auto_close(t.span);
    finalize_top(t.span);
  }

  void auto_close(SourceSpan span) {
    Builder& top = stack.back();
    if (!top.implicit) {
      repair("unclosed-tag",
             std::string("<") + block_kind_name(top.kind) + "> auto-closed", span);
    }
    finalize_top(span);
  }

  void close_all(const std::string& why, SourceSpan span) {
    while (!stack.empty()) {
      Builder& top = stack.back();
      if (!top.implicit) {
        repair("unclosed-tag",
               std::string("<") + block_kind_name(top.kind) + "> " + why, span);
      }
      finalize_top(span);
    }
  }

  void finalize_top(SourceSpan span) {
    Builder b = std::move(stack.back());
    stack.pop_back();

    if (!b.loc_run.empty()) {
      repair("loc-incomplete",
             "incomplete bounding box (" + std::to_string(b.loc_run.size()) +
                 " of 4 loc tags) dropped",
             span);
    }

    Block& block = b.block;
    if (holds_cells(b.kind) && b.has_cells) {
      if (!is_blank(b.text)) {
        repair("table-stray-text", "text before the first cell tag dropped", b.open_span);
      }
      OtslDecodeResult decoded = decode(b.cells, mode);
      for (Diagnostic& d : decoded.diagnostics) {
        if (d.span == SourceSpan{}) d.span = b.open_span;
        diags.push_back(std::move(d));
      }
      block.table = std::move(decoded.grid);
      block.text.clear();
    } else if (b.kind == BlockKind::Otsl) {
      if (!is_blank(b.text)) {
        repair("table-stray-text", "text inside otsl without cell tags dropped", b.open_span);
      }
      OtslDecodeResult decoded = decode(b.cells, mode);  // empty -> 1x1 empty grid
      for (Diagnostic& d : decoded.diagnostics) {
        if (d.span == SourceSpan{}) d.span = b.open_span;
        diags.push_back(std::move(d));
      }
      block.table = std::move(decoded.grid);
      block.text.clear();
    } else if (is_verbatim(b.kind)) {
      block.text = std::move(b.text);
    } else {
      block.text = std::string(trim_ws(b.text));
    }

    if (mode == ParseMode::Lenient && !block.loc) {
      info("missing-loc", std::string("<") + block_kind_name(b.kind) + "> has no bounding box",
           b.open_span);
    }

    if (!stack.empty()) {
      stack.back().block.children.push_back(std::move(block));
      // The child sat between the parent's text runs; keep a boundary
      // so the runs cannot fuse into markup (children serialize after
      // content, so canonical input never reaches this).
      note_drop();
    } else {
      page().push_back(std::move(block));
    }
  }

  void run(std::span<const Token> tokens) {
    for (const Token& t : tokens) {
      if (note_started(t)) continue;  // opening <doctag> consumed
      if (!started) continue;         // leading whitespace
      switch (t.kind) {
        case TokenKind::Text:
          on_text(t);
          break;
        case TokenKind::Open:
          on_open(t);
          break;
        case TokenKind::Close:
          on_close(t);
          break;
        case TokenKind::Standalone:
          if (t.loc_value) {
            on_loc(t);
          } else if (t.name == kPageBreakTag) {
            on_page_break(t);
          } else if (cell_tag_from_name(t.name)) {
            on_cell(t);
          } else if (picture_class_from_name(t.name)) {
            on_picture_class(t);
          } else {
            on_lang(t);
          }
          break;
      }
    }
    SourceSpan eof{src.size(), src.size()};
    if (!stack.empty()) {
      close_all("left open at end of input", eof);
    }
    if (started && root_seen && !root_closed) {
      repair("unclosed-tag", "<doctag> never closed", eof);
    }
    if (!started) {
      repair("missing-root", "empty input", eof);
    }
  }
};

}  // namespace

ParseResult parse(std::string_view source, ParseMode mode) {
  TokenizeResult lexed = tokenize(source);

  ParseResult result;
  for (Diagnostic& d : lexed.diagnostics) {
    // unknown-tag findings are re-reported in context by the tree
    // builder (they are silent inside verbatim content).
    if (d.code == "unknown-tag") continue;
    if (mode == ParseMode::Strict && d.code == "loc-out-of-range") d.severity = Severity::Error;
    result.diagnostics.push_back(std::move(d));
  }

  std::vector<Token> tokens = std::move(lexed.tokens);
  if (mode == ParseMode::Lenient) {
    if (auto cut = detect_repetition(tokens, kDefaultMinRepeats, kDefaultMaxPeriod)) {
      SourceSpan span{tokens[*cut].span.begin, source.size()};
      result.diagnostics.push_back(
          make_diag(Severity::Warning, "repetition-truncated",
                    "trailing repetition loop truncated after one period (" +
                        std::to_string(tokens.size() - *cut) + " tokens dropped)",
                    span));
      tokens.resize(*cut);
    }
  }

  Engine engine(mode, source);
  engine.run(tokens);
  for (Diagnostic& d : engine.diags) result.diagnostics.push_back(std::move(d));

  if (mode == ParseMode::Strict && has_errors(result.diagnostics)) {
    result.document.reset();
  } else {
    result.document = std::move(engine.doc);
  }
  return result;
}

namespace {

void serialize_block(const Block& block, std::string& out) {
  const char* name = block_kind_name(block.kind);
  out += '<';
  out += name;
  out += '>';
  if (block.loc) {
    for (int v : {block.loc->x1, block.loc->y1, block.loc->x2, block.loc->y2}) {
      out += "<loc_";
      out += std::to_string(v);
      out += '>';
    }
  }
  if (block.code_lang) {
    out += "<_";
    out += code_lang_name(*block.code_lang);
    out += "_>";
  }
  for (PictureClass cls : block.picture_classes) {
    out += '<';
    out += picture_class_name(cls);
    out += '>';
  }
  if (block.table) {
    for (const OtslToken& token : encode(*block.table)) {
      out += '<';
      out += cell_tag_name(token.tag);
      out += '>';
      if (token.text) out += *token.text;
    }
  } else {
    out += block.text;
  }
  for (const Block& child : block.children) serialize_block(child, out);
  out += "</";
  out += name;
  out += '>';
}

}  // namespace

std::string serialize(const Document& doc) {
  std::vector<Diagnostic> issues = validate(doc);
  if (!issues.empty()) {
    throw std::invalid_argument("serialize: document failed validation (" + issues.front().code +
                                " at " + issues.front().block_path + ")");
  }
  std::string out = "<doctag>";
  for (std::size_t p = 0; p < doc.pages.size(); ++p) {
    if (p > 0) out += "<page_break>";
    for (const Block& block : doc.pages[p]) serialize_block(block, out);
  }
  out += "</doctag>";
  return out;
}

}  // namespace doctags
