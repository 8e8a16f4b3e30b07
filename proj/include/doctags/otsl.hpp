#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "doctags/diagnostics.hpp"
#include "doctags/html_table.hpp"

namespace doctags {

/// Table-structure tags. fcel/ched/rhed/srow open a content-carrying
/// cell, ecel an empty cell, lcel/ucel/xcel extend the merge of the
/// origin to the left / above / up-left, nl ends a row.
enum class CellTag { Fcel, Ecel, Lcel, Ucel, Xcel, Ched, Rhed, Srow, Nl };

const char* cell_tag_name(CellTag tag);
std::optional<CellTag> cell_tag_from_name(std::string_view name);
bool cell_tag_carries_text(CellTag tag);

enum class CellRole { Body, ColumnHeader, RowHeader, SectionRow };

const char* cell_role_name(CellRole role);
std::optional<CellRole> cell_role_from_name(std::string_view name);

struct GridCell {
  bool origin = true;
  std::string text;
  int row_span = 1;
  int col_span = 1;
  CellRole role = CellRole::Body;
  bool empty = true;

  bool operator==(const GridCell&) const = default;
};

/// Rectangular cell matrix. Covered (non-origin) slots hold default
/// fields; each one lies inside exactly one origin's span rectangle.
struct TableGrid {
  int rows = 0;
  int cols = 0;
  std::vector<GridCell> cells;  // row-major, rows*cols entries

  static TableGrid blank(int rows, int cols);

  GridCell& at(int row, int col);
  const GridCell& at(int row, int col) const;

  /// Coordinates of the origin cell covering (row, col); identity for
  /// origin slots. Requires a span-consistent grid.
  std::pair<int, int> origin_of(int row, int col) const;

  bool operator==(const TableGrid&) const = default;
};

/// Structural well-formedness: positive dimensions, matrix size,
/// in-bounds non-overlapping span rectangles covering every non-origin
/// slot, empty <=> text == "" with body role, trimmed cell text.
std::vector<Diagnostic> validate_grid(const TableGrid& grid);

/// One structure token with the text run that followed it (only
/// fcel/ched/rhed/srow legitimately carry one).
struct OtslToken {
  CellTag tag;
  std::optional<std::string> text;

  bool operator==(const OtslToken&) const = default;
};

struct OtslDecodeResult {
  TableGrid grid;
  std::vector<Diagnostic> diagnostics;
};

/// Builds the resolved grid from a row-major token run. In lenient mode
/// every rule violation is repaired (offending cell degrades to an
/// empty cell, short rows are padded, a missing trailing nl is
/// appended) and recorded as a warning; in strict mode violations are
/// error diagnostics and the grid is best-effort.
OtslDecodeResult decode(std::span<const OtslToken> tokens, ParseMode mode);

/// Canonical row-major token emission, nl after each row. Throws
/// std::invalid_argument when the grid fails validate_grid.
std::vector<OtslToken> encode(const TableGrid& grid);

/// table > tr > td/th tree. Column headers become th; row-header and
/// section-row cells become td with a data-role attribute so the tree
/// converts back losslessly. rowspan/colspan attributes only when > 1;
/// covered slots emit nothing; text is entity-escaped.
HtmlNode grid_to_html(const TableGrid& grid);

struct HtmlToGridResult {
  std::optional<TableGrid> grid;
  std::vector<Diagnostic> diagnostics;
};

/// Standard table layout: each tr is filled left to right, skipping
/// slots claimed by earlier row spans. Overlapping spans are resolved
/// first-come, ragged rows padded with empty cells, both with
/// diagnostics. A non-table root is an error.
HtmlToGridResult html_to_grid(const HtmlNode& root);

}  // namespace doctags
