#include "doctags/latex_norm.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>

#include "json.hpp"

namespace doctags {

namespace {

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_space_char(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Index of the '}' matching the '{' at `open`, or npos. Skips the
// character after every backslash so escaped braces do not count.
std::size_t matching_brace(std::string_view src, std::size_t open) {
  int depth = 0;
  for (std::size_t k = open + 1; k < src.size(); ++k) {
    char c = src[k];
    if (c == '\\') {
      ++k;
      continue;
    }
    if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (depth == 0) return k;
      --depth;
    }
  }
  return std::string_view::npos;
}

}  // namespace

LatexTokenizeResult tokenize_latex(std::string_view src) {
  LatexTokenizeResult result;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == '\\') {
      std::size_t j = i + 1;
      if (j >= src.size()) {
        result.tokens.push_back({LatexTokenKind::Symbol, "\\"});
        break;
      }
      if (is_letter(src[j])) {
        while (j < src.size() && is_letter(src[j])) ++j;
      } else {
        ++j;  // single-character command: \, \; \{ \\ "\ "
      }
      result.tokens.push_back({LatexTokenKind::Command, std::string(src.substr(i, j - i))});
      i = j;
      continue;
    }
    if (c == '{') {
      std::size_t close = matching_brace(src, i);
      if (close == std::string_view::npos) {
        result.diagnostics.push_back(
            make_diag(Severity::Warning, "latex-unbalanced-brace",
                      "opening brace without a match", {i, i + 1}));
        result.tokens.push_back({LatexTokenKind::BraceOpen, "{"});
        ++i;
        continue;
      }
      result.tokens.push_back({LatexTokenKind::Group, std::string(src.substr(i, close - i + 1))});
      i = close + 1;
      continue;
    }
    if (c == '}') {
      result.diagnostics.push_back(make_diag(Severity::Warning, "latex-unbalanced-brace",
                                             "closing brace without a match", {i, i + 1}));
      result.tokens.push_back({LatexTokenKind::BraceClose, "}"});
      ++i;
      continue;
    }
    if (is_space_char(c)) {
      std::size_t j = i;
      while (j < src.size() && is_space_char(src[j])) ++j;
      result.tokens.push_back({LatexTokenKind::Whitespace, std::string(src.substr(i, j - i))});
      i = j;
      continue;
    }
    result.tokens.push_back({LatexTokenKind::Symbol, std::string(1, c)});
    ++i;
  }
  return result;
}

NormPolicy NormPolicy::defaults() {
  NormPolicy p;
  p.remove = {"\\displaystyle", "\\nonumber"};
  p.remove_with_group = {"\\label"};
  p.replace = {{"\\dfrac", "\\frac"}, {"\\tfrac", "\\frac"}};
  return p;
}

namespace {

std::string with_backslash(std::string name) {
  if (!name.empty() && name.front() != '\\') name.insert(name.begin(), '\\');
  return name;
}

}  // namespace

PolicyLoadResult load_policy(std::string_view json_text) {
  PolicyLoadResult result;
  nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    result.diagnostics.push_back(
        make_diag(Severity::Error, "policy-malformed", "policy file is not a JSON object"));
    return result;
  }
  NormPolicy policy = NormPolicy::defaults();
  try {
    if (doc.contains("remove")) {
      policy.remove.clear();
      for (const auto& item : doc.at("remove")) policy.remove.insert(with_backslash(item));
    }
    if (doc.contains("remove_with_group")) {
      policy.remove_with_group.clear();
      for (const auto& item : doc.at("remove_with_group")) {
        policy.remove_with_group.insert(with_backslash(item));
      }
    }
    if (doc.contains("replace")) {
      policy.replace.clear();
      for (const auto& [key, value] : doc.at("replace").items()) {
        policy.replace[with_backslash(key)] = with_backslash(value.get<std::string>());
      }
    }
    if (doc.contains("passes")) {
      const auto& passes = doc.at("passes");
      auto flag = [&passes](const char* name, bool fallback) {
        return passes.contains(name) ? passes.at(name).get<bool>() : fallback;
      };
      policy.over_rewrite = flag("over_rewrite", policy.over_rewrite);
      policy.spacing = flag("spacing", policy.spacing);
      policy.delimiters = flag("delimiters", policy.delimiters);
      policy.brace_arity = flag("brace_arity", policy.brace_arity);
      policy.collapse = flag("collapse", policy.collapse);
    }
  } catch (const nlohmann::json::exception& e) {
    result.diagnostics.push_back(
        make_diag(Severity::Error, "policy-malformed", std::string("policy file: ") + e.what()));
    return result;
  }

  // The replace map must terminate when applied transitively.
  for (const auto& [from, unused] : policy.replace) {
    (void)unused;
    std::string cursor = from;
    std::size_t hops = 0;
    while (policy.replace.count(cursor)) {
      cursor = policy.replace.at(cursor);
      if (++hops > policy.replace.size()) {
        result.diagnostics.push_back(make_diag(Severity::Error, "policy-replace-cycle",
                                               "replace map cycles through " + from));
        return result;
      }
    }
  }

  result.policy = std::move(policy);
  return result;
}

std::string policy_fingerprint(const NormPolicy& policy) {
  std::string canon;
  for (const std::string& s : policy.remove) canon += "r:" + s + ";";
  for (const std::string& s : policy.remove_with_group) canon += "g:" + s + ";";
  for (const auto& [from, to] : policy.replace) canon += "m:" + from + ">" + to + ";";
  canon += policy.over_rewrite ? "O" : "o";
  canon += policy.spacing ? "S" : "s";
  canon += policy.delimiters ? "D" : "d";
  canon += policy.brace_arity ? "B" : "b";
  canon += policy.collapse ? "C" : "c";
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : canon) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

namespace {

struct Node {
  enum class Type { Command, Symbol, Space, Group, TextGroup };
  Type type = Type::Symbol;
  std::string value;           // command name / symbol char / TextGroup interior
  std::vector<Node> children;  // Group only
};

struct Normalizer {
  const NormPolicy& policy;
  std::vector<Diagnostic> diags;

  explicit Normalizer(const NormPolicy& p) : policy(p) {}

  // ----- construction ------------------------------------------------

  std::vector<Node> build(std::string_view src) {
    LatexTokenizeResult lexed = tokenize_latex(src);
    for (Diagnostic& d : lexed.diagnostics) diags.push_back(std::move(d));
    std::vector<Node> nodes;
    for (LatexToken& token : lexed.tokens) {
      switch (token.kind) {
        case LatexTokenKind::Command:
          nodes.push_back({Node::Type::Command, std::move(token.lexeme), {}});
          break;
        case LatexTokenKind::Whitespace:
          nodes.push_back({Node::Type::Space, " ", {}});
          break;
        case LatexTokenKind::Group: {
          std::string_view interior(token.lexeme);
          interior = interior.substr(1, interior.size() - 2);
          Node group{Node::Type::Group, std::string(interior), build(interior)};
          nodes.push_back(std::move(group));
          break;
        }
        case LatexTokenKind::BraceOpen:
          nodes.push_back({Node::Type::Symbol, "{", {}});
          break;
        case LatexTokenKind::BraceClose:
          nodes.push_back({Node::Type::Symbol, "}", {}});
          break;
        case LatexTokenKind::Symbol:
          nodes.push_back({Node::Type::Symbol, std::move(token.lexeme), {}});
          break;
      }
    }
    return nodes;
  }

  // ----- vocabulary ----------------------------------------------------

  static bool text_like(const std::string& cmd) {
    static const std::set<std::string> kTextLike = {
        "\\text", "\\textbf", "\\textit", "\\textrm", "\\textsf",
        "\\texttt", "\\mbox",  "\\hbox",   "\\operatorname",
    };
    return kTextLike.count(cmd) > 0;
  }

  static bool spacing_command(const std::string& cmd) {
    static const std::set<std::string> kSpacing = {
        "\\,", "\\;", "\\:", "\\!", "\\quad", "\\qquad", "\\ ", "\\enspace", "\\thinspace",
    };
    return kSpacing.count(cmd) > 0;
  }

  // 0 none, +1 opener, -1 closer, 2 ambiguous
  static int delim_class(const Node& node) {
    if (node.type == Node::Type::Symbol) {
      if (node.value == "(" || node.value == "[") return 1;
      if (node.value == ")" || node.value == "]") return -1;
      if (node.value == "|" || node.value == "/" || node.value == ".") return 2;
      return 0;
    }
    if (node.type == Node::Type::Command) {
      static const std::set<std::string> kOpen = {"\\{", "\\langle", "\\lfloor", "\\lceil",
                                                  "\\lvert", "\\lVert"};
      static const std::set<std::string> kClose = {"\\}", "\\rangle", "\\rfloor", "\\rceil",
                                                   "\\rvert", "\\rVert"};
      static const std::set<std::string> kAmbi = {"\\vert", "\\Vert", "\\|", "\\backslash",
                                                  "\\uparrow", "\\downarrow", "\\updownarrow"};
      if (kOpen.count(node.value)) return 1;
      if (kClose.count(node.value)) return -1;
      if (kAmbi.count(node.value)) return 2;
    }
    return 0;
  }

  // Sized-delimiter command: returns direction hint from the suffix
  // (+1 l, -1 r, 0 bare/m) or nullopt when not from the family.
  static std::optional<int> sized_family(const std::string& cmd) {
    static const std::set<std::string> kBare = {"\\big", "\\Big", "\\bigg", "\\Bigg"};
    if (kBare.count(cmd)) return 0;
    if (cmd.size() > 1) {
      std::string stem = cmd.substr(0, cmd.size() - 1);
      char suffix = cmd.back();
      if (kBare.count(stem)) {
        if (suffix == 'l') return 1;
        if (suffix == 'r') return -1;
        if (suffix == 'm') return 0;
      }
    }
    return std::nullopt;
  }

  static bool one_arg_command(const std::string& cmd) {
    static const std::set<std::string> kOneArg = {
        "\\sqrt",      "\\hat",       "\\bar",      "\\vec",      "\\dot",     "\\ddot",
        "\\tilde",     "\\widetilde", "\\widehat",  "\\overline", "\\underline",
        "\\mathbf",    "\\mathrm",    "\\mathit",   "\\mathcal",  "\\mathbb",
        "\\mathfrak",  "\\mathsf",    "\\mathtt",   "\\boldsymbol",
    };
    return kOneArg.count(cmd) > 0;
  }

  static bool two_arg_command(const std::string& cmd) {
    return cmd == "\\frac" || cmd == "\\binom" || cmd == "\\overset" || cmd == "\\underset";
  }

  // ----- passes (applied per level) ------------------------------------

  void apply_replace(std::vector<Node>& nodes) {
    for (Node& node : nodes) {
      if (node.type != Node::Type::Command) continue;
      std::size_t hops = 0;
      while (policy.replace.count(node.value) && hops++ <= policy.replace.size()) {
        node.value = policy.replace.at(node.value);
      }
    }
  }

  void apply_remove(std::vector<Node>& nodes) {
    std::vector<Node> out;
    out.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      Node& node = nodes[i];
      if (node.type == Node::Type::Command && policy.remove.count(node.value)) {
        continue;
      }
      if (node.type == Node::Type::Command && policy.remove_with_group.count(node.value)) {
        std::size_t j = i + 1;
        while (j < nodes.size() && nodes[j].type == Node::Type::Space) ++j;
        if (j < nodes.size() && nodes[j].type == Node::Type::Group) i = j;
        continue;
      }
      out.push_back(std::move(node));
    }
    nodes = std::move(out);
  }

  static bool stray_brace(const Node& node) {
    return node.type == Node::Type::Symbol && (node.value == "{" || node.value == "}");
  }

  // {a \over b} -> \frac{a}{b}, leftmost split, recursing right. Levels
  // holding stray unbalanced braces are left alone: wrapping a stray in
  // a new group would re-pair the braces on the next tokenization and
  // break the fixed point.
  std::vector<Node> apply_over(std::vector<Node> nodes) {
    if (std::any_of(nodes.begin(), nodes.end(), stray_brace)) return nodes;
    auto at = std::find_if(nodes.begin(), nodes.end(), [](const Node& n) {
      return n.type == Node::Type::Command && n.value == "\\over";
    });
    if (at == nodes.end()) return nodes;
    std::vector<Node> left(std::make_move_iterator(nodes.begin()), std::make_move_iterator(at));
    std::vector<Node> right(std::make_move_iterator(at + 1), std::make_move_iterator(nodes.end()));
    right = apply_over(std::move(right));
    std::vector<Node> out;
    out.push_back({Node::Type::Command, "\\frac", {}});
    out.push_back({Node::Type::Group, "", std::move(left)});
    out.push_back({Node::Type::Group, "", std::move(right)});
    return out;
  }

  void apply_delimiters(std::vector<Node>& nodes) {
    // Sized families first: paired -> \left/\right, unpaired dropped.
    struct SizedUse {
      std::size_t cmd_index;
      int direction;  // resolved opener(+1)/closer(-1)
    };
    std::vector<std::size_t> pending;  // opener command indices
    std::vector<std::size_t> drop;
    std::map<std::size_t, const char*> rewrite;

    auto next_solid = [&nodes](std::size_t i) {
      std::size_t j = i + 1;
      while (j < nodes.size() && nodes[j].type == Node::Type::Space) ++j;
      return j;
    };

    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].type != Node::Type::Command) continue;
      auto family = sized_family(nodes[i].value);
      if (!family) continue;
      std::size_t d = next_solid(i);
      int cls = d < nodes.size() ? delim_class(nodes[d]) : 0;
      if (cls == 0) {
        diags.push_back(make_diag(Severity::Warning, "latex-unpaired-sized-delimiter",
                                  nodes[i].value + " without a delimiter dropped"));
        drop.push_back(i);
        continue;
      }
      int direction = *family != 0 ? *family : (cls == 2 ? 0 : cls);
      if (direction > 0) {
        pending.push_back(i);
      } else if (direction < 0) {
        if (!pending.empty()) {
          rewrite[pending.back()] = "\\left";
          rewrite[i] = "\\right";
          pending.pop_back();
        } else {
          diags.push_back(make_diag(Severity::Warning, "latex-unpaired-sized-delimiter",
                                    nodes[i].value + " closes nothing; dropped"));
          drop.push_back(i);
        }
      } else {
        diags.push_back(make_diag(Severity::Warning, "latex-unpaired-sized-delimiter",
                                  nodes[i].value + " has no pairing direction; dropped"));
        drop.push_back(i);
      }
    }
    for (std::size_t i : pending) {
      diags.push_back(make_diag(Severity::Warning, "latex-unpaired-sized-delimiter",
                                nodes[i].value + " never closed; dropped"));
      drop.push_back(i);
    }
    for (auto& [index, name] : rewrite) nodes[index].value = name;
    std::sort(drop.begin(), drop.end());
    for (std::size_t k = drop.size(); k-- > 0;) {
      nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(drop[k]));
    }

    // \left/\right balance. A missing delimiter becomes the invisible ".".
    int open_depth = 0;
    std::size_t unmatched_right = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].type != Node::Type::Command) continue;
      if (nodes[i].value == "\\left" || nodes[i].value == "\\right") {
        std::size_t d = next_solid(i);
        if (d >= nodes.size() || delim_class(nodes[d]) == 0) {
          diags.push_back(make_diag(Severity::Warning, "latex-unpaired-delimiter",
                                    nodes[i].value + " without a delimiter; \".\" inserted"));
          nodes.insert(nodes.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                       Node{Node::Type::Symbol, ".", {}});
        }
        if (nodes[i].value == "\\left") {
          ++open_depth;
        } else if (open_depth > 0) {
          --open_depth;
        } else {
          ++unmatched_right;
        }
      }
    }
    for (std::size_t k = 0; k < unmatched_right; ++k) {
      diags.push_back(make_diag(Severity::Warning, "latex-unpaired-delimiter",
                                "\\right without \\left; \"\\left.\" prepended"));
      nodes.insert(nodes.begin(), Node{Node::Type::Symbol, ".", {}});
      nodes.insert(nodes.begin(), Node{Node::Type::Command, "\\left", {}});
    }
    for (int k = 0; k < open_depth; ++k) {
      diags.push_back(make_diag(Severity::Warning, "latex-unpaired-delimiter",
                                "\\left without \\right; \"\\right.\" appended"));
      nodes.push_back(Node{Node::Type::Command, "\\right", {}});
      nodes.push_back(Node{Node::Type::Symbol, ".", {}});
    }
  }

  // Wraps the argument at `arg` in a group unless it already is one.
  // Returns the index just past the argument.
  std::size_t brace_argument(std::vector<Node>& nodes, std::size_t arg) {
    if (arg >= nodes.size()) return arg;
    Node& node = nodes[arg];
    if (node.type == Node::Type::Group || node.type == Node::Type::TextGroup) return arg + 1;
    if (node.type == Node::Type::Command &&
        (node.value == "\\left" || node.value == "\\right" || sized_family(node.value))) {
      return arg;  // cannot grab structural delimiters
    }
    if (stray_brace(node)) return arg;  // wrapping a stray would re-pair it
    if (node.type == Node::Type::Symbol || node.type == Node::Type::Command) {
      Node group{Node::Type::Group, "", {}};
      group.children.push_back(std::move(node));
      nodes[arg] = std::move(group);
      return arg + 1;
    }
    return arg;
  }

  // Deletes spaces starting at `from` and returns the index of the next
  // solid node.
  std::size_t eat_spaces(std::vector<Node>& nodes, std::size_t from) {
    while (from < nodes.size() && nodes[from].type == Node::Type::Space) {
      nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(from));
    }
    return from;
  }

  void apply_arity(std::vector<Node>& nodes) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].type == Node::Type::Symbol &&
          (nodes[i].value == "^" || nodes[i].value == "_")) {
        // Scripts bind tight: spaces around them disappear.
        while (i > 0 && nodes[i - 1].type == Node::Type::Space) {
          nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(i) - 1);
          --i;
        }
        std::size_t arg = eat_spaces(nodes, i + 1);
        brace_argument(nodes, arg);
        continue;
      }
      if (nodes[i].type != Node::Type::Command) continue;
      if (two_arg_command(nodes[i].value)) {
        std::size_t arg = eat_spaces(nodes, i + 1);
        arg = brace_argument(nodes, arg);
        arg = eat_spaces(nodes, arg);
        brace_argument(nodes, arg);
      } else if (one_arg_command(nodes[i].value)) {
        std::size_t arg = eat_spaces(nodes, i + 1);
        if (nodes[i].value == "\\sqrt" && arg < nodes.size() &&
            nodes[arg].type == Node::Type::Symbol && nodes[arg].value == "[") {
          while (arg < nodes.size() &&
                 !(nodes[arg].type == Node::Type::Symbol && nodes[arg].value == "]")) {
            ++arg;
          }
          if (arg < nodes.size()) ++arg;  // past "]"
          arg = eat_spaces(nodes, arg);
        }
        brace_argument(nodes, arg);
      }
    }
  }

  void apply_collapse(std::vector<Node>& nodes) {
    // Runs of spacing commands (possibly space-separated) keep the first.
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].type != Node::Type::Command || !spacing_command(nodes[i].value)) continue;
      std::size_t j = i + 1;
      while (j < nodes.size()) {
        std::size_t k = j;
        while (k < nodes.size() && nodes[k].type == Node::Type::Space) ++k;
        if (k < nodes.size() && nodes[k].type == Node::Type::Command &&
            spacing_command(nodes[k].value)) {
          nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(j),
                      nodes.begin() + static_cast<std::ptrdiff_t>(k) + 1);
        } else {
          break;
        }
      }
    }

    // ^{\prime...} -> trailing apostrophes.
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      if (!(nodes[i].type == Node::Type::Symbol && nodes[i].value == "^")) continue;
      const Node& arg = nodes[i + 1];
      if (arg.type != Node::Type::Group || arg.children.empty()) continue;
      bool all_primes = std::all_of(arg.children.begin(), arg.children.end(), [](const Node& n) {
        return n.type == Node::Type::Command && n.value == "\\prime";
      });
      if (!all_primes) continue;
      std::size_t count = arg.children.size();
      nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(i),
                  nodes.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      for (std::size_t k = 0; k < count; ++k) {
        nodes.insert(nodes.begin() + static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(k),
                     Node{Node::Type::Symbol, "'", {}});
      }
      i += count - 1;
    }

    // Runs of three or more dots.
    auto collapse_run = [&nodes](auto&& match, const char* replacement) {
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!match(nodes[i])) continue;
        std::size_t j = i;
        while (j < nodes.size() && match(nodes[j])) ++j;
        if (j - i >= 3) {
          nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(i),
                      nodes.begin() + static_cast<std::ptrdiff_t>(j));
          nodes.insert(nodes.begin() + static_cast<std::ptrdiff_t>(i),
                       Node{Node::Type::Command, replacement, {}});
        } else {
          i = j - 1;
        }
      }
    };
    collapse_run([](const Node& n) { return n.type == Node::Type::Symbol && n.value == "."; },
                 "\\ldots");
    collapse_run(
        [](const Node& n) { return n.type == Node::Type::Command && n.value == "\\cdot"; },
        "\\cdots");
  }

  void collapse_spaces(std::vector<Node>& nodes) {
    // No two consecutive space tokens; none at the level edges.
    std::vector<Node> out;
    out.reserve(nodes.size());
    for (Node& node : nodes) {
      if (node.type == Node::Type::Space) {
        if (out.empty() || out.back().type == Node::Type::Space) continue;
        out.push_back(std::move(node));
      } else {
        out.push_back(std::move(node));
      }
    }
    while (!out.empty() && out.back().type == Node::Type::Space) out.pop_back();
    nodes = std::move(out);
  }

  void mark_text_groups(std::vector<Node>& nodes) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].type != Node::Type::Command || !text_like(nodes[i].value)) continue;
      std::size_t j = i + 1;
      while (j < nodes.size() && nodes[j].type == Node::Type::Space) ++j;
      if (j < nodes.size() && nodes[j].type == Node::Type::Group) {
        nodes[j].type = Node::Type::TextGroup;
        nodes[j].children.clear();
      }
    }
  }

  void apply_level(std::vector<Node>& nodes) {
    mark_text_groups(nodes);
    apply_replace(nodes);
    apply_remove(nodes);
    if (policy.over_rewrite) nodes = apply_over(std::move(nodes));
    if (policy.brace_arity) apply_arity(nodes);
    if (policy.collapse) apply_collapse(nodes);
    if (policy.delimiters) apply_delimiters(nodes);
    if (policy.spacing) collapse_spaces(nodes);
    for (Node& node : nodes) {
      if (node.type == Node::Type::Group) apply_level(node.children);
    }
  }

  // ----- rendering ------------------------------------------------------

  static bool letter_command(const std::string& value) {
    return value.size() >= 2 && value.front() == '\\' && is_letter(value[1]);
  }

  void render(const std::vector<Node>& nodes, std::string& out) const {
    for (const Node& node : nodes) {
      switch (node.type) {
        case Node::Type::Command:
          out += node.value;
          break;
        case Node::Type::Space:
          out += ' ';
          break;
        case Node::Type::Symbol:
          // A letter right after a letter-command would be swallowed.
          if (!out.empty() && is_letter(node.value.front())) {
            std::size_t k = out.size();
            while (k > 0 && is_letter(out[k - 1])) --k;
            if (k > 0 && out[k - 1] == '\\' && k < out.size()) out += ' ';
          }
          out += node.value;
          break;
        case Node::Type::Group:
          out += '{';
          render(node.children, out);
          out += '}';
          break;
        case Node::Type::TextGroup:
          out += '{';
          out += node.value;
          out += '}';
          break;
      }
    }
  }

  std::string run(std::string_view src) {
    std::vector<Node> nodes = build(src);
    apply_level(nodes);
    std::string out;
    render(nodes, out);
    return out;
  }
};

}  // namespace

NormalizeResult normalize(std::string_view src, const NormPolicy& policy) {
  // The rewrite passes interact (a dropped delimiter can expose a new
  // argument pattern, collapsed dots can strand a \left), so the
  // pipeline iterates until the text stops changing. Real formulas
  // settle in one or two rounds.
  Normalizer first(policy);
  NormalizeResult result;
  result.text = first.run(src);
  result.diagnostics = std::move(first.diags);
  for (int round = 0; round < 8; ++round) {
    Normalizer again(policy);
    std::string next = again.run(result.text);
    if (next == result.text) break;
    result.text = std::move(next);
  }
  return result;
}

}  // namespace doctags
