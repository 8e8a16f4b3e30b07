#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace doctags {

enum class Severity { Info, Warning, Error };

const char* severity_name(Severity severity);

/// How defective input is handled across the toolkit: strict reports
/// violations as errors and yields no document, lenient repairs and
/// records every deviation as a diagnostic.
enum class ParseMode { Strict, Lenient };

/// Byte range [begin, end) into the source text.
struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const SourceSpan&) const = default;
};

/// One parse/validation/repair finding. `code` is a stable identifier
/// (the full list is documented in the README); `block_path` is a
/// slash-separated index path into the result tree, first component the
/// page index ("0/2/1" = page 0, block 2, child 1), empty when the
/// finding has no tree location.
struct Diagnostic {
  Severity severity = Severity::Warning;
  std::string code;
  std::string message;
  SourceSpan span;
  std::string block_path;
};

inline Diagnostic make_diag(Severity severity, std::string code, std::string message,
                            SourceSpan span = {}, std::string block_path = {}) {
  return Diagnostic{severity, std::move(code), std::move(message), span, std::move(block_path)};
}

bool has_errors(const std::vector<Diagnostic>& diags);
std::size_t count_severity(const std::vector<Diagnostic>& diags, Severity severity);

}  // namespace doctags
