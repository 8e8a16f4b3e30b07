#include "doctags/otsl.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

#include "doctags/model.hpp"
#include "doctags/strings.hpp"

namespace doctags {

namespace {

constexpr const char* kCellTagNames[] = {"fcel", "ecel", "lcel", "ucel", "xcel",
                                         "ched", "rhed", "srow", "nl"};
constexpr CellTag kAllCellTags[] = {CellTag::Fcel, CellTag::Ecel, CellTag::Lcel,
                                    CellTag::Ucel, CellTag::Xcel, CellTag::Ched,
                                    CellTag::Rhed, CellTag::Srow, CellTag::Nl};

GridCell covered_slot() {
  GridCell slot;
  slot.origin = false;
  slot.text.clear();
  slot.row_span = 1;
  slot.col_span = 1;
  slot.role = CellRole::Body;
  slot.empty = false;
  return slot;
}

bool is_origin_tag(CellTag tag) {
  return tag == CellTag::Fcel || tag == CellTag::Ecel || tag == CellTag::Ched ||
         tag == CellTag::Rhed || tag == CellTag::Srow;
}

CellRole role_of_tag(CellTag tag) {
  switch (tag) {
    case CellTag::Ched: return CellRole::ColumnHeader;
    case CellTag::Rhed: return CellRole::RowHeader;
    case CellTag::Srow: return CellRole::SectionRow;
    default: return CellRole::Body;
  }
}

CellTag tag_of_origin(const GridCell& cell) {
  if (cell.empty) return CellTag::Ecel;
  switch (cell.role) {
    case CellRole::ColumnHeader: return CellTag::Ched;
    case CellRole::RowHeader: return CellTag::Rhed;
    case CellRole::SectionRow: return CellTag::Srow;
    case CellRole::Body: break;
  }
  return CellTag::Fcel;
}

}  // namespace

const char* cell_tag_name(CellTag tag) { return kCellTagNames[static_cast<int>(tag)]; }

std::optional<CellTag> cell_tag_from_name(std::string_view name) {
  for (CellTag tag : kAllCellTags) {
    if (name == cell_tag_name(tag)) return tag;
  }
  return std::nullopt;
}

bool cell_tag_carries_text(CellTag tag) {
  return tag == CellTag::Fcel || tag == CellTag::Ched || tag == CellTag::Rhed ||
         tag == CellTag::Srow;
}

const char* cell_role_name(CellRole role) {
  switch (role) {
    case CellRole::Body: return "body";
    case CellRole::ColumnHeader: return "column_header";
    case CellRole::RowHeader: return "row_header";
    case CellRole::SectionRow: return "section_row";
  }
  return "body";
}

std::optional<CellRole> cell_role_from_name(std::string_view name) {
  for (CellRole role : {CellRole::Body, CellRole::ColumnHeader, CellRole::RowHeader,
                        CellRole::SectionRow}) {
    if (name == cell_role_name(role)) return role;
  }
  return std::nullopt;
}

TableGrid TableGrid::blank(int rows, int cols) {
  TableGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.cells.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), GridCell{});
  return grid;
}

GridCell& TableGrid::at(int row, int col) {
  return cells[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) +
               static_cast<std::size_t>(col)];
}

const GridCell& TableGrid::at(int row, int col) const {
  return cells[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) +
               static_cast<std::size_t>(col)];
}

std::pair<int, int> TableGrid::origin_of(int row, int col) const {
  if (at(row, col).origin) return {row, col};
  for (int r = 0; r <= row; ++r) {
    for (int c = 0; c <= col; ++c) {
      const GridCell& cell = at(r, c);
      if (!cell.origin) continue;
      if (row < r + cell.row_span && col < c + cell.col_span) return {r, c};
    }
  }
  return {row, col};  // unreachable on span-consistent grids
}

std::vector<Diagnostic> validate_grid(const TableGrid& grid) {
  std::vector<Diagnostic> diags;
  auto report = [&diags](std::string code, std::string message) {
    diags.push_back(make_diag(Severity::Error, std::move(code), std::move(message)));
  };

  if (grid.rows < 1 || grid.cols < 1) {
    report("table-dims", "grid dimensions must be at least 1x1");
    return diags;
  }
  if (grid.cells.size() !=
      static_cast<std::size_t>(grid.rows) * static_cast<std::size_t>(grid.cols)) {
    report("table-shape", "cell matrix size does not match rows*cols");
    return diags;
  }

  std::vector<int> owner(grid.cells.size(), -1);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const GridCell& cell = grid.at(r, c);
      if (!cell.origin) continue;
      if (cell.row_span < 1 || cell.col_span < 1) {
        report("table-span-invalid", "span below 1 at (" + std::to_string(r) + "," +
                                         std::to_string(c) + ")");
        continue;
      }
      if (r + cell.row_span > grid.rows || c + cell.col_span > grid.cols) {
        report("table-span-out-of-bounds", "span rectangle exceeds grid bounds at (" +
                                               std::to_string(r) + "," + std::to_string(c) + ")");
        continue;
      }
      int id = r * grid.cols + c;
      for (int rr = r; rr < r + cell.row_span; ++rr) {
        for (int cc = c; cc < c + cell.col_span; ++cc) {
          int slot = rr * grid.cols + cc;
          if (owner[static_cast<std::size_t>(slot)] != -1) {
            report("table-span-overlap", "span rectangles overlap at (" + std::to_string(rr) +
                                             "," + std::to_string(cc) + ")");
          } else {
            owner[static_cast<std::size_t>(slot)] = id;
          }
          if (slot != id && grid.at(rr, cc).origin) {
            report("table-span-overlap", "origin cell inside another cell's span at (" +
                                             std::to_string(rr) + "," + std::to_string(cc) + ")");
          }
        }
      }
    }
  }

  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const GridCell& cell = grid.at(r, c);
      std::string where = " at (" + std::to_string(r) + "," + std::to_string(c) + ")";
      if (!cell.origin) {
        if (owner[static_cast<std::size_t>(r * grid.cols + c)] == -1) {
          report("table-slot-uncovered", "covered slot lies outside every span rectangle" + where);
        }
        if (cell != covered_slot()) {
          report("table-covered-noncanonical",
                 "non-origin slot carries non-default fields" + where);
        }
        continue;
      }
      if (cell.empty != cell.text.empty()) {
        report("table-empty-text-mismatch",
               "empty flag disagrees with text content" + where);
      }
      if (cell.empty && cell.role != CellRole::Body) {
        report("table-empty-role", "empty cell carries a header/section role" + where);
      }
      if (trim_ws(cell.text) != cell.text) {
        report("table-cell-text-untrimmed", "cell text carries surrounding whitespace" + where);
      }
      if (text_embeds_markup(cell.text, /*known_only=*/false)) {
        report("text-embeds-markup", "cell text contains a sequence that lexes as markup" + where);
      }
    }
  }
  return diags;
}

namespace {

struct Decoder {
  ParseMode mode;
  std::vector<Diagnostic> diags;

  void report(std::string code, std::string message) {
    Severity severity = mode == ParseMode::Strict ? Severity::Error : Severity::Warning;
    diags.push_back(make_diag(severity, std::move(code), std::move(message)));
  }
};

}  // namespace

OtslDecodeResult decode(std::span<const OtslToken> tokens, ParseMode mode) {
  Decoder dec{mode, {}};

  struct RawCell {
    CellTag tag;
    std::string text;
  };
  std::vector<std::vector<RawCell>> rows;
  std::vector<RawCell> current;

  if (tokens.empty() || tokens.back().tag != CellTag::Nl) {
    dec.report("otsl-missing-nl", "token run does not end with a row break; one appended");
  }

  for (const OtslToken& token : tokens) {
    std::string text = token.text ? std::string(trim_ws(*token.text)) : std::string();
    if (token.tag == CellTag::Nl) {
      if (!text.empty()) {
        dec.report("otsl-unexpected-text", "text after a row break was dropped");
      }
      if (current.empty()) {
        dec.report("otsl-empty-row", "row with no cells was dropped");
      } else {
        rows.push_back(std::move(current));
        current.clear();
      }
      continue;
    }
    CellTag tag = token.tag;
    if (cell_tag_carries_text(tag) && text.empty()) {
      dec.report("otsl-missing-text",
                 std::string(cell_tag_name(tag)) + " without following text degraded to ecel");
      tag = CellTag::Ecel;
    } else if (!cell_tag_carries_text(tag) && !text.empty()) {
      if (tag == CellTag::Ecel) {
        dec.report("otsl-unexpected-text", "text after ecel; treated as a full cell");
        tag = CellTag::Fcel;
      } else {
        dec.report("otsl-unexpected-text",
                   std::string("text after ") + cell_tag_name(tag) + " was dropped");
        text.clear();
      }
    }
    current.push_back(RawCell{tag, std::move(text)});
  }
  if (!current.empty()) rows.push_back(std::move(current));

  if (rows.empty()) {
    dec.report("otsl-empty", "no table rows; produced a 1x1 empty grid");
    TableGrid grid = TableGrid::blank(1, 1);
    grid.at(0, 0) = GridCell{};  // empty origin
    return {std::move(grid), std::move(dec.diags)};
  }

  std::size_t cols = 0;
  for (const auto& row : rows) cols = std::max(cols, row.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      dec.report("otsl-ragged-rows", "row " + std::to_string(r) +
                                         " shorter than the widest row; padded with empty cells");
      rows[r].resize(cols, RawCell{CellTag::Ecel, {}});
    }
  }

  const int n_rows = static_cast<int>(rows.size());
  const int n_cols = static_cast<int>(cols);
  auto tag_at = [&rows, n_cols](int r, int c) -> CellTag& {
    (void)n_cols;
    return rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].tag;
  };

  // Per-cell continuation rules; offenders degrade to empty cells.
  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < n_cols; ++c) {
      CellTag tag = tag_at(r, c);
      std::string where = " at (" + std::to_string(r) + "," + std::to_string(c) + ")";
      switch (tag) {
        case CellTag::Lcel: {
          if (c == 0) {
            dec.report("otsl-lcel-first-column", "lcel in the first column" + where);
            tag_at(r, c) = CellTag::Ecel;
          } else if (CellTag left = tag_at(r, c - 1);
                     !(is_origin_tag(left) || left == CellTag::Lcel)) {
            dec.report("otsl-merge-not-rectangular",
                       "lcel does not extend a cell in its own row" + where);
            tag_at(r, c) = CellTag::Ecel;
          }
          break;
        }
        case CellTag::Ucel: {
          if (r == 0) {
            dec.report("otsl-ucel-first-row", "ucel in the first row" + where);
            tag_at(r, c) = CellTag::Ecel;
          } else if (CellTag up = tag_at(r - 1, c);
                     !(is_origin_tag(up) || up == CellTag::Ucel)) {
            dec.report("otsl-merge-not-rectangular",
                       "ucel does not extend a cell in its own column" + where);
            tag_at(r, c) = CellTag::Ecel;
          }
          break;
        }
        case CellTag::Xcel: {
          bool ok = r > 0 && c > 0;
          if (ok) {
            CellTag left = tag_at(r, c - 1);
            CellTag up = tag_at(r - 1, c);
            ok = (left == CellTag::Ucel || left == CellTag::Xcel) &&
                 (up == CellTag::Lcel || up == CellTag::Xcel);
          }
          if (!ok) {
            dec.report("otsl-xcel-missing-neighbor",
                       "xcel lacks its merge neighbors to the left and above" + where);
            tag_at(r, c) = CellTag::Ecel;
          }
          break;
        }
        default:
          break;
      }
    }
  }

  // Resolve each slot to its origin.
  std::vector<std::pair<int, int>> origin(static_cast<std::size_t>(n_rows * n_cols));
  auto origin_at = [&origin, n_cols](int r, int c) -> std::pair<int, int>& {
    return origin[static_cast<std::size_t>(r * n_cols + c)];
  };
  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < n_cols; ++c) {
      CellTag tag = tag_at(r, c);
      if (is_origin_tag(tag)) {
        origin_at(r, c) = {r, c};
      } else if (tag == CellTag::Lcel) {
        origin_at(r, c) = origin_at(r, c - 1);
      } else if (tag == CellTag::Ucel) {
        origin_at(r, c) = origin_at(r - 1, c);
      } else {  // Xcel
        auto from_left = origin_at(r, c - 1);
        auto from_up = origin_at(r - 1, c);
        if (from_left != from_up) {
          dec.report("otsl-merge-not-rectangular",
                     "xcel joins two different merges at (" + std::to_string(r) + "," +
                         std::to_string(c) + ")");
          tag_at(r, c) = CellTag::Ecel;
          origin_at(r, c) = {r, c};
        } else {
          origin_at(r, c) = from_left;
        }
      }
    }
  }

  // Merge regions must be exact rectangles anchored at their origin;
  // otherwise the whole region collapses back to single cells. Region
  // extents accumulate in one pass keyed by the anchor's slot id.
  const std::size_t n_slots = static_cast<std::size_t>(n_rows * n_cols);
  std::vector<int> region_count(n_slots, 0);
  std::vector<int> region_max_r(n_slots, 0);
  std::vector<int> region_max_c(n_slots, 0);
  auto slot_id = [n_cols](std::pair<int, int> at) {
    return static_cast<std::size_t>(at.first * n_cols + at.second);
  };
  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < n_cols; ++c) {
      std::size_t id = slot_id(origin_at(r, c));
      ++region_count[id];
      region_max_r[id] = std::max(region_max_r[id], r);
      region_max_c[id] = std::max(region_max_c[id], c);
    }
  }
  std::vector<bool> broken(n_slots, false);
  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < n_cols; ++c) {
      if (!is_origin_tag(tag_at(r, c))) continue;
      std::size_t id = static_cast<std::size_t>(r * n_cols + c);
      int area = (region_max_r[id] - r + 1) * (region_max_c[id] - c + 1);
      if (region_count[id] != area) {
        broken[id] = true;
        dec.report("otsl-merge-not-rectangular",
                   "merge region anchored at (" + std::to_string(r) + "," + std::to_string(c) +
                       ") is not rectangular; split into single cells");
      }
    }
  }
  std::vector<bool> degraded(n_slots, false);
  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < n_cols; ++c) {
      std::size_t id = slot_id(origin_at(r, c));
      if (!broken[id]) continue;
      if (static_cast<std::size_t>(r * n_cols + c) != id) {
        tag_at(r, c) = CellTag::Ecel;
        origin_at(r, c) = {r, c};
        degraded[static_cast<std::size_t>(r * n_cols + c)] = true;
      }
    }
  }

  TableGrid grid = TableGrid::blank(n_rows, n_cols);
  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < n_cols; ++c) {
      CellTag tag = tag_at(r, c);
      if (!is_origin_tag(tag)) {
        grid.at(r, c) = covered_slot();
        continue;
      }
      std::size_t id = static_cast<std::size_t>(r * n_cols + c);
      GridCell cell;
      cell.origin = true;
      cell.text = std::move(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].text);
      if (broken[id] || degraded[id]) {
        cell.row_span = 1;
        cell.col_span = 1;
      } else {
        cell.row_span = region_max_r[id] - r + 1;
        cell.col_span = region_max_c[id] - c + 1;
      }
      cell.role = role_of_tag(tag);
      cell.empty = tag == CellTag::Ecel;
      grid.at(r, c) = std::move(cell);
    }
  }

  return {std::move(grid), std::move(dec.diags)};
}

std::vector<OtslToken> encode(const TableGrid& grid) {
  if (!validate_grid(grid).empty()) {
    throw std::invalid_argument("encode: grid fails validation");
  }

  // Owner map so covered slots know their origin without scanning.
  std::vector<std::pair<int, int>> owner(grid.cells.size());
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const GridCell& cell = grid.at(r, c);
      if (!cell.origin) continue;
      for (int rr = r; rr < r + cell.row_span; ++rr) {
        for (int cc = c; cc < c + cell.col_span; ++cc) {
          owner[static_cast<std::size_t>(rr * grid.cols + cc)] = {r, c};
        }
      }
    }
  }

  std::vector<OtslToken> tokens;
  tokens.reserve(grid.cells.size() + static_cast<std::size_t>(grid.rows));
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const GridCell& cell = grid.at(r, c);
      if (cell.origin) {
        CellTag tag = tag_of_origin(cell);
        if (cell_tag_carries_text(tag)) {
          tokens.push_back(OtslToken{tag, cell.text});
        } else {
          tokens.push_back(OtslToken{tag, std::nullopt});
        }
        continue;
      }
      auto [orow, ocol] = owner[static_cast<std::size_t>(r * grid.cols + c)];
      CellTag tag = CellTag::Xcel;
      if (r == orow) tag = CellTag::Lcel;
      else if (c == ocol) tag = CellTag::Ucel;
      tokens.push_back(OtslToken{tag, std::nullopt});
    }
    tokens.push_back(OtslToken{CellTag::Nl, std::nullopt});
  }
  return tokens;
}

HtmlNode grid_to_html(const TableGrid& grid) {
  HtmlNode table;
  table.tag = "table";
  for (int r = 0; r < grid.rows; ++r) {
    HtmlNode tr;
    tr.tag = "tr";
    for (int c = 0; c < grid.cols; ++c) {
      const GridCell& cell = grid.at(r, c);
      if (!cell.origin) continue;
      HtmlNode td;
      td.tag = cell.role == CellRole::ColumnHeader ? "th" : "td";
      if (cell.row_span > 1) td.attrs["rowspan"] = std::to_string(cell.row_span);
      if (cell.col_span > 1) td.attrs["colspan"] = std::to_string(cell.col_span);
      if (cell.role == CellRole::RowHeader) td.attrs["data-role"] = "rhed";
      if (cell.role == CellRole::SectionRow) td.attrs["data-role"] = "srow";
      td.text = cell.text;
      tr.children.push_back(std::move(td));
    }
    table.children.push_back(std::move(tr));
  }
  return table;
}

HtmlToGridResult html_to_grid(const HtmlNode& root) {
  HtmlToGridResult result;
  if (root.tag != "table") {
    result.diagnostics.push_back(
        make_diag(Severity::Error, "html-not-table", "root element is not a table"));
    return result;
  }

  std::vector<const HtmlNode*> trs;
  auto collect_rows = [&trs](const HtmlNode& node, auto&& self) -> void {
    for (const HtmlNode& child : node.children) {
      if (child.tag == "tr") {
        trs.push_back(&child);
      } else {
        self(child, self);
      }
    }
  };
  collect_rows(root, collect_rows);

  if (trs.empty()) {
    result.diagnostics.push_back(
        make_diag(Severity::Warning, "html-empty-table", "table holds no rows; 1x1 grid produced"));
    TableGrid grid = TableGrid::blank(1, 1);
    grid.at(0, 0) = GridCell{};
    result.grid = std::move(grid);
    return result;
  }

  struct Placed {
    int row, col, row_span, col_span;
    const HtmlNode* node;
  };
  std::vector<Placed> placed;
  std::vector<std::vector<bool>> used(trs.size());
  auto used_at = [&used](std::size_t r, std::size_t c) -> bool {
    return c < used[r].size() && used[r][c];
  };
  auto mark = [&used](std::size_t r, std::size_t c) {
    if (used[r].size() <= c) used[r].resize(c + 1, false);
    used[r][c] = true;
  };

  for (std::size_t r = 0; r < trs.size(); ++r) {
    std::size_t cursor = 0;
    for (const HtmlNode& cell : trs[r]->children) {
      if (cell.tag != "td" && cell.tag != "th") continue;
      while (used_at(r, cursor)) ++cursor;
      int rs = std::max(1, cell.int_attr("rowspan", 1));
      int cs = std::max(1, cell.int_attr("colspan", 1));
      if (r + static_cast<std::size_t>(rs) > trs.size()) {
        result.diagnostics.push_back(make_diag(Severity::Warning, "html-span-overflow",
                                               "rowspan runs past the last row; clipped"));
        rs = static_cast<int>(trs.size() - r);
      }
      // Clip the claim to the free rectangle anchored at the cursor.
      int free_cs = 1;
      while (free_cs < cs && !used_at(r, cursor + static_cast<std::size_t>(free_cs))) ++free_cs;
      if (free_cs < cs) {
        result.diagnostics.push_back(make_diag(Severity::Warning, "html-span-overlap",
                                               "colspan collides with an earlier span; clipped"));
        cs = free_cs;
      }
      int free_rs = 1;
      for (; free_rs < rs; ++free_rs) {
        bool blocked = false;
        for (int cc = 0; cc < cs && !blocked; ++cc) {
          blocked = used_at(r + static_cast<std::size_t>(free_rs),
                            cursor + static_cast<std::size_t>(cc));
        }
        if (blocked) break;
      }
      if (free_rs < rs) {
        result.diagnostics.push_back(make_diag(Severity::Warning, "html-span-overlap",
                                               "rowspan collides with an earlier span; clipped"));
        rs = free_rs;
      }
      for (int rr = 0; rr < rs; ++rr) {
        for (int cc = 0; cc < cs; ++cc) {
          mark(r + static_cast<std::size_t>(rr), cursor + static_cast<std::size_t>(cc));
        }
      }
      placed.push_back(Placed{static_cast<int>(r), static_cast<int>(cursor), rs, cs, &cell});
      cursor += static_cast<std::size_t>(cs);
    }
  }

  std::size_t cols = 1;
  for (const auto& row : used) cols = std::max(cols, row.size());

  // Unclaimed slots remain default-constructed empty origin cells.
  TableGrid grid = TableGrid::blank(static_cast<int>(trs.size()), static_cast<int>(cols));
  bool padded = false;
  for (std::size_t r = 0; r < trs.size(); ++r) {
    if (used[r].size() < cols) padded = true;
    for (std::size_t c = 0; c < used[r].size(); ++c) {
      if (!used[r][c]) padded = true;
    }
  }
  if (padded) {
    result.diagnostics.push_back(make_diag(Severity::Warning, "html-ragged-row",
                                           "rows cover unequal widths; padded with empty cells"));
  }

  // Foreign HTML may carry escaped markup in cell text ("&lt;text>"
  // becomes a literal "<text>"); such spans cannot survive a trip
  // through the tag stream, so a space is wedged in after the bracket.
  bool sanitized = false;
  auto sanitize = [&sanitized](std::string text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] != '<') continue;
      std::size_t start = i + 1;
      if (start < text.size() && text[start] == '/') ++start;
      std::size_t close = text.find('>', start);
      if (close == std::string::npos || close == start || close - start > 40) continue;
      if (!looks_like_tag_name(std::string_view(text).substr(start, close - start))) continue;
      text.insert(i + 1, 1, ' ');
      sanitized = true;
    }
    return text;
  };

  for (const Placed& p : placed) {
    GridCell cell;
    cell.origin = true;
    cell.text = sanitize(std::string(trim_ws(p.node->text)));
    cell.row_span = p.row_span;
    cell.col_span = p.col_span;
    cell.empty = cell.text.empty();
    if (cell.empty) {
      cell.role = CellRole::Body;
    } else if (p.node->tag == "th") {
      cell.role = CellRole::ColumnHeader;
    } else {
      auto it = p.node->attrs.find("data-role");
      if (it != p.node->attrs.end() && it->second == "rhed") cell.role = CellRole::RowHeader;
      else if (it != p.node->attrs.end() && it->second == "srow") cell.role = CellRole::SectionRow;
      else cell.role = CellRole::Body;
    }
    grid.at(p.row, p.col) = std::move(cell);
    for (int rr = p.row; rr < p.row + p.row_span; ++rr) {
      for (int cc = p.col; cc < p.col + p.col_span; ++cc) {
        if (rr == p.row && cc == p.col) continue;
        grid.at(rr, cc) = covered_slot();
      }
    }
  }
  if (sanitized) {
    result.diagnostics.push_back(
        make_diag(Severity::Warning, "html-cell-text-sanitized",
                  "cell text contained markup-shaped spans; spaces inserted"));
  }

  result.grid = std::move(grid);
  return result;
}

}  // namespace doctags
