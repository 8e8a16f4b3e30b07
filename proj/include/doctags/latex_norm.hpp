#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "doctags/diagnostics.hpp"

namespace doctags {

enum class LatexTokenKind { Command, BraceOpen, BraceClose, Symbol, Whitespace, Group };

/// Lossless lexeme: concatenating all lexemes reproduces the source.
/// Group lexemes include their outer braces; BraceOpen/BraceClose are
/// only emitted for braces with no match.
struct LatexToken {
  LatexTokenKind kind = LatexTokenKind::Symbol;
  std::string lexeme;

  bool operator==(const LatexToken&) const = default;
};

struct LatexTokenizeResult {
  std::vector<LatexToken> tokens;
  std::vector<Diagnostic> diagnostics;
};

LatexTokenizeResult tokenize_latex(std::string_view src);

/// Rewrite policy: which commands vanish (optionally with their braced
/// argument) and which are renamed. The replace map must be acyclic.
struct NormPolicy {
  std::set<std::string> remove;
  std::set<std::string> remove_with_group;
  std::map<std::string, std::string> replace;
  bool over_rewrite = true;
  bool spacing = true;
  bool delimiters = true;
  bool brace_arity = true;
  bool collapse = true;

  static NormPolicy defaults();
};

struct PolicyLoadResult {
  std::optional<NormPolicy> policy;
  std::vector<Diagnostic> diagnostics;
};

/// JSON object with optional keys: "remove", "remove_with_group"
/// (string arrays), "replace" (string map), "passes" (bool map with
/// keys over_rewrite/spacing/delimiters/brace_arity/collapse).
/// Commands may be written with or without the leading backslash.
/// A cyclic replace map is rejected.
PolicyLoadResult load_policy(std::string_view json_text);

/// Stable 64-bit FNV-1a fingerprint of the policy, hex-encoded;
/// evaluation reports carry it so scores can be tied to the exact
/// rewrite rules used.
std::string policy_fingerprint(const NormPolicy& policy);

struct NormalizeResult {
  std::string text;
  std::vector<Diagnostic> diagnostics;
};

/// Canonicalizes a formula: policy removals/replacements, {..\over..}
/// to \frac, whitespace collapsed to single spaces (consumed around
/// scripts and command arguments), sized delimiters to \left/\right
/// (unpaired ones dropped, unpaired \left/\right balanced with the
/// invisible "." delimiter), script and known-command arguments always
/// braced, spacing-command runs and prime/dot runs collapsed. The
/// result is a fixed point: normalizing it again changes nothing.
NormalizeResult normalize(std::string_view src, const NormPolicy& policy = NormPolicy::defaults());

}  // namespace doctags
