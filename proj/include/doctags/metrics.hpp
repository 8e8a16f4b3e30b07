#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "doctags/html_table.hpp"

namespace doctags {

/// Levenshtein distance over Unicode code points divided by the longer
/// length; 0 when both strings are empty.
double normalized_edit_distance(std::string_view pred, std::string_view gt);

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

/// Bag-of-tokens overlap: tokens split on Unicode whitespace, counts
/// intersected as multisets, precision |∩|/|pred|, recall |∩|/|gt|.
Prf token_prf(std::string_view pred, std::string_view gt);

/// Geometric mean of modified n-gram precisions (n = 1..max_n, orders
/// with no prediction n-grams are skipped) times the brevity penalty
/// exp(1 - |gt|/|pred|) when the prediction is shorter. Zero precisions
/// are floored at 1e-9 so single-sentence scores stay defined.
double bleu(std::string_view pred, std::string_view gt, int max_n = 4);

struct TextScore {
  double edit_distance = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double bleu = 0;
};

TextScore score_text(std::string_view pred, std::string_view gt);

/// Unicode-whitespace tokenization used by token_prf and bleu.
std::vector<std::string> split_tokens(std::string_view text);

/// Ordered tree edit distance (insert/delete cost 1; relabel cost 1
/// when tag names or rowspan/colspan differ, else the normalized edit
/// distance of cell text for td/th nodes unless structure_only, else
/// 0). Classic dynamic program over keyroots.
double tree_edit_distance(const HtmlNode& a, const HtmlNode& b, bool structure_only);

/// 1 - TED / max(node counts). structure_only strips all text before
/// comparison. Throws std::invalid_argument unless both roots are
/// table elements.
double teds(const HtmlNode& pred, const HtmlNode& gt, bool structure_only);

}  // namespace doctags
