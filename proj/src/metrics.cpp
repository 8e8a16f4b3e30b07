#include "doctags/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

namespace doctags {

namespace {

// Decodes UTF-8 into code points; malformed bytes decode individually
// so arbitrary byte strings still compare stably.
std::vector<char32_t> decode_utf8(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    char32_t cp = c;
    if ((c & 0x80u) == 0) {
      len = 1;
    } else if ((c & 0xE0u) == 0xC0u) {
      len = 2;
      cp = c & 0x1Fu;
    } else if ((c & 0xF0u) == 0xE0u) {
      len = 3;
      cp = c & 0x0Fu;
    } else if ((c & 0xF8u) == 0xF0u) {
      len = 4;
      cp = c & 0x07u;
    } else {
      out.push_back(0xDC00u + c);  // lone continuation/invalid byte
      ++i;
      continue;
    }
    if (i + len > text.size()) {
      out.push_back(0xDC00u + c);
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0u) != 0x80u) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3Fu);
    }
    if (!ok) {
      out.push_back(0xDC00u + c);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\r': case 0x0B: case 0x0C:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::size_t levenshtein(const std::vector<char32_t>& a, const std::vector<char32_t>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::size_t> prev(m + 1), curr(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

}  // namespace

double normalized_edit_distance(std::string_view pred, std::string_view gt) {
  std::vector<char32_t> a = decode_utf8(pred);
  std::vector<char32_t> b = decode_utf8(gt);
  std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::vector<char32_t> cps = decode_utf8(text);
  // Re-encode per token from the original bytes by walking in lockstep.
  std::string current;
  std::size_t byte = 0;
  for (char32_t cp : cps) {
    // Width of this code point in the source (malformed bytes are 1).
    std::size_t width = 1;
    unsigned char c = static_cast<unsigned char>(text[byte]);
    if (cp < 0xDC00u || cp > 0xDCFFu) {
      if ((c & 0xE0u) == 0xC0u) width = 2;
      else if ((c & 0xF0u) == 0xE0u) width = 3;
      else if ((c & 0xF8u) == 0xF0u) width = 4;
    }
    if (is_unicode_space(cp)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.append(text.substr(byte, width));
    }
    byte += width;
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Prf token_prf(std::string_view pred, std::string_view gt) {
  std::vector<std::string> pt = split_tokens(pred);
  std::vector<std::string> gte = split_tokens(gt);
  std::map<std::string, int> pred_bag, gt_bag;
  for (const std::string& t : pt) ++pred_bag[t];
  for (const std::string& t : gte) ++gt_bag[t];
  int common = 0;
  for (const auto& [token, count] : pred_bag) {
    auto it = gt_bag.find(token);
    if (it != gt_bag.end()) common += std::min(count, it->second);
  }
  Prf out;
  out.precision = pt.empty() ? 0.0 : static_cast<double>(common) / static_cast<double>(pt.size());
  out.recall = gte.empty() ? 0.0 : static_cast<double>(common) / static_cast<double>(gte.size());
  out.f1 = (out.precision + out.recall) > 0
               ? 2 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

double bleu(std::string_view pred, std::string_view gt, int max_n) {
  constexpr double kEps = 1e-9;
  std::vector<std::string> pt = split_tokens(pred);
  std::vector<std::string> gte = split_tokens(gt);
  if (pt.empty() && gte.empty()) return 1.0;
  if (pt.empty()) return 0.0;

  double log_sum = 0.0;
  int counted = 0;
  for (int n = 1; n <= max_n; ++n) {
    if (static_cast<int>(pt.size()) < n) break;  // vacuous order
    std::map<std::vector<std::string>, int> pred_ngrams, gt_ngrams;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= pt.size(); ++i) {
      ++pred_ngrams[{pt.begin() + static_cast<std::ptrdiff_t>(i),
                     pt.begin() + static_cast<std::ptrdiff_t>(i) + n}];
    }
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= gte.size(); ++i) {
      ++gt_ngrams[{gte.begin() + static_cast<std::ptrdiff_t>(i),
                   gte.begin() + static_cast<std::ptrdiff_t>(i) + n}];
    }
    int matched = 0;
    int total = 0;
    for (const auto& [ngram, count] : pred_ngrams) {
      total += count;
      auto it = gt_ngrams.find(ngram);
      if (it != gt_ngrams.end()) matched += std::min(count, it->second);
    }
    double p = std::max(static_cast<double>(matched) / static_cast<double>(total), kEps);
    log_sum += std::log(p);
    ++counted;
  }
  if (counted == 0) return 0.0;
  double geo_mean = std::exp(log_sum / counted);
  double bp = 1.0;
  if (pt.size() < gte.size()) {
    bp = std::exp(1.0 - static_cast<double>(gte.size()) / static_cast<double>(pt.size()));
  }
  return geo_mean * bp;
}

TextScore score_text(std::string_view pred, std::string_view gt) {
  TextScore score;
  score.edit_distance = normalized_edit_distance(pred, gt);
  Prf prf = token_prf(pred, gt);
  score.precision = prf.precision;
  score.recall = prf.recall;
  score.f1 = prf.f1;
  score.bleu = bleu(pred, gt);
  return score;
}

namespace {

bool is_cell_tag_name(const std::string& tag) { return tag == "td" || tag == "th"; }

struct FlatNode {
  std::string tag;
  std::string text;
  int row_span = 1;
  int col_span = 1;
  bool is_cell = false;
  int leftmost = 0;  // postorder index of leftmost leaf descendant
};

// Postorder flattening for the keyroot dynamic program.
struct FlatTree {
  std::vector<FlatNode> nodes;   // postorder
  std::vector<int> keyroots;

  explicit FlatTree(const HtmlNode& root, bool strip_text) {
    build(root, strip_text);
    std::vector<bool> has_upper(nodes.size(), false);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (std::size_t j = i + 1; j < nodes.size(); ++j) {
        if (nodes[j].leftmost == nodes[i].leftmost) {
          has_upper[i] = true;
          break;
        }
      }
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!has_upper[i]) keyroots.push_back(static_cast<int>(i));
    }
  }

  int build(const HtmlNode& node, bool strip_text) {
    int leftmost = -1;
    for (const HtmlNode& child : node.children) {
      int l = build(child, strip_text);
      if (leftmost < 0) leftmost = l;
    }
    FlatNode flat;
    flat.tag = node.tag;
    flat.is_cell = is_cell_tag_name(node.tag);
    if (!strip_text) flat.text = node.text;
    flat.row_span = node.int_attr("rowspan", 1);
    flat.col_span = node.int_attr("colspan", 1);
    int index = static_cast<int>(nodes.size());
    flat.leftmost = leftmost < 0 ? index : leftmost;
    nodes.push_back(std::move(flat));
    return nodes.back().leftmost;
  }
};

double relabel_cost(const FlatNode& a, const FlatNode& b, bool structure_only) {
  if (a.tag != b.tag) return 1.0;
  if (a.row_span != b.row_span || a.col_span != b.col_span) return 1.0;
  if (!structure_only && a.is_cell && b.is_cell) {
    return normalized_edit_distance(a.text, b.text);
  }
  return 0.0;
}

}  // namespace

double tree_edit_distance(const HtmlNode& a, const HtmlNode& b, bool structure_only) {
  FlatTree t1(a, structure_only);
  FlatTree t2(b, structure_only);
  const int n1 = static_cast<int>(t1.nodes.size());
  const int n2 = static_cast<int>(t2.nodes.size());

  std::vector<std::vector<double>> treedist(static_cast<std::size_t>(n1),
                                            std::vector<double>(static_cast<std::size_t>(n2), 0));
  std::vector<std::vector<double>> fd(static_cast<std::size_t>(n1) + 2,
                                      std::vector<double>(static_cast<std::size_t>(n2) + 2, 0));

  for (int ki : t1.keyroots) {
    for (int kj : t2.keyroots) {
      int li = t1.nodes[static_cast<std::size_t>(ki)].leftmost;
      int lj = t2.nodes[static_cast<std::size_t>(kj)].leftmost;
      // Forest distances over the subforests li..ki and lj..kj,
      // indexed with a 1-based offset against li/lj.
      fd[0][0] = 0;
      for (int i = li; i <= ki; ++i) fd[static_cast<std::size_t>(i - li + 1)][0] =
          fd[static_cast<std::size_t>(i - li)][0] + 1;
      for (int j = lj; j <= kj; ++j) fd[0][static_cast<std::size_t>(j - lj + 1)] =
          fd[0][static_cast<std::size_t>(j - lj)] + 1;
      for (int i = li; i <= ki; ++i) {
        for (int j = lj; j <= kj; ++j) {
          int ii = i - li + 1;
          int jj = j - lj + 1;
          int lmi = t1.nodes[static_cast<std::size_t>(i)].leftmost;
          int lmj = t2.nodes[static_cast<std::size_t>(j)].leftmost;
          double del = fd[static_cast<std::size_t>(ii - 1)][static_cast<std::size_t>(jj)] + 1;
          double ins = fd[static_cast<std::size_t>(ii)][static_cast<std::size_t>(jj - 1)] + 1;
          if (lmi == li && lmj == lj) {
            double sub = fd[static_cast<std::size_t>(ii - 1)][static_cast<std::size_t>(jj - 1)] +
                         relabel_cost(t1.nodes[static_cast<std::size_t>(i)],
                                      t2.nodes[static_cast<std::size_t>(j)], structure_only);
            double best = std::min({del, ins, sub});
            fd[static_cast<std::size_t>(ii)][static_cast<std::size_t>(jj)] = best;
            treedist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = best;
          } else {
            double sub = fd[static_cast<std::size_t>(lmi - li)][static_cast<std::size_t>(lmj - lj)] +
                         treedist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            fd[static_cast<std::size_t>(ii)][static_cast<std::size_t>(jj)] =
                std::min({del, ins, sub});
          }
        }
      }
    }
  }
  return treedist[static_cast<std::size_t>(n1 - 1)][static_cast<std::size_t>(n2 - 1)];
}

double teds(const HtmlNode& pred, const HtmlNode& gt, bool structure_only) {
  if (pred.tag != "table" || gt.tag != "table") {
    throw std::invalid_argument("teds: both trees must be rooted at <table>");
  }
  double ted = tree_edit_distance(pred, gt, structure_only);
  double denom = static_cast<double>(std::max(pred.node_count(), gt.node_count()));
  return 1.0 - ted / denom;
}

}  // namespace doctags
