#include "doctags/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace doctags {

double Rect::area() const {
  return std::max(0.0, x2 - x1) * std::max(0.0, y2 - y1);
}

namespace {

int quantize(double coord, double page_dim) {
  double scaled = coord / page_dim * kLocGridMax;
  long value = std::lround(scaled);  // ties away from zero
  return static_cast<int>(std::clamp(value, 0L, static_cast<long>(kLocGridMax)));
}

void require_page(double page_width, double page_height) {
  if (!(page_width > 0) || !(page_height > 0)) {
    throw std::invalid_argument("page dimensions must be positive");
  }
}

}  // namespace

LocBox encode_loc(const PixelBox& box) {
  require_page(box.page_width, box.page_height);
  LocBox loc;
  loc.x1 = quantize(box.x1, box.page_width);
  loc.y1 = quantize(box.y1, box.page_height);
  loc.x2 = quantize(box.x2, box.page_width);
  loc.y2 = quantize(box.y2, box.page_height);
  if (loc.x1 > loc.x2) std::swap(loc.x1, loc.x2);
  if (loc.y1 > loc.y2) std::swap(loc.y1, loc.y2);
  return loc;
}

PixelBox decode_loc(const LocBox& loc, double page_width, double page_height) {
  require_page(page_width, page_height);
  PixelBox box;
  box.x1 = static_cast<double>(loc.x1) * page_width / kLocGridMax;
  box.y1 = static_cast<double>(loc.y1) * page_height / kLocGridMax;
  box.x2 = static_cast<double>(loc.x2) * page_width / kLocGridMax;
  box.y2 = static_cast<double>(loc.y2) * page_height / kLocGridMax;
  box.page_width = page_width;
  box.page_height = page_height;
  return box;
}

double iou(const Rect& a, const Rect& b) {
  double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  double inter = ix * iy;
  double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

double iou(const LocBox& a, const LocBox& b) {
  auto rect = [](const LocBox& l) {
    return Rect{static_cast<double>(l.x1), static_cast<double>(l.y1),
                static_cast<double>(l.x2), static_cast<double>(l.y2)};
  };
  return iou(rect(a), rect(b));
}

namespace {

constexpr int kThresholdCount = 10;   // 0.50 : 0.05 : 0.95
constexpr int kRecallPoints = 101;    // 0.00 : 0.01 : 1.00

double threshold_at(int t) { return 0.5 + 0.05 * t; }

// AP for one class at one IoU threshold from pooled match flags, each
// entry (score, input order, is_tp), gt_count > 0.
double average_precision(std::vector<char> tp_flags, int gt_count) {
  const std::size_t n = tp_flags.size();
  std::vector<double> precision(n), recall(n);
  int tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += tp_flags[k] ? 1 : 0;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / gt_count;
  }
  // Precision envelope: best precision achievable at recall >= r.
  for (std::size_t k = n; k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double sum = 0.0;
  std::size_t k = 0;
  for (int i = 0; i < kRecallPoints; ++i) {
    double r = static_cast<double>(i) / (kRecallPoints - 1);
    while (k < n && recall[k] + 1e-12 < r) ++k;
    if (k < n) sum += precision[k];
  }
  return sum / kRecallPoints;
}

}  // namespace

MapReport evaluate_map(std::span<const Detection> preds, std::span<const Detection> gts,
                       std::span<const std::string> classes) {
  MapReport report;
  auto known = [&classes](const std::string& label) {
    return std::find(classes.begin(), classes.end(), label) != classes.end();
  };
  for (const Detection& d : preds) {
    if (!known(d.label)) {
      report.diagnostics.push_back(make_diag(Severity::Warning, "unknown-class",
                                             "prediction with unknown class \"" + d.label +
                                                 "\" ignored"));
    }
  }
  for (const Detection& d : gts) {
    if (!known(d.label)) {
      report.diagnostics.push_back(make_diag(
          Severity::Warning, "unknown-class",
          "ground truth with unknown class \"" + d.label + "\" ignored"));
    }
  }

  double ap_sum = 0.0;
  int present_classes = 0;

  for (const std::string& cls : classes) {
    // Index predictions and ground truth of this class by image.
    std::vector<std::size_t> cls_preds;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i].label == cls) cls_preds.push_back(i);
    }
    std::stable_sort(cls_preds.begin(), cls_preds.end(), [&preds](std::size_t a, std::size_t b) {
      return preds[a].score.value_or(0.0) > preds[b].score.value_or(0.0);
    });

    std::map<std::string, std::vector<std::size_t>> gt_by_image;
    int gt_count = 0;
    for (std::size_t i = 0; i < gts.size(); ++i) {
      if (gts[i].label != cls) continue;
      gt_by_image[gts[i].image_id].push_back(i);
      ++gt_count;
    }

    if (gt_count == 0) {
      report.per_class[cls] = std::nullopt;
      continue;
    }

    double ap_over_thresholds = 0.0;
    for (int t = 0; t < kThresholdCount; ++t) {
      double thr = threshold_at(t);
      std::map<std::string, std::vector<bool>> gt_used;
      for (const auto& [image, idxs] : gt_by_image) {
        gt_used[image].assign(idxs.size(), false);
      }
      std::vector<char> tp_flags;
      tp_flags.reserve(cls_preds.size());
      for (std::size_t pi : cls_preds) {
        const Detection& pred = preds[pi];
        auto it = gt_by_image.find(pred.image_id);
        bool matched = false;
        if (it != gt_by_image.end()) {
          std::vector<bool>& used = gt_used[pred.image_id];
          // First unused ground truth of maximal IoU, accepted at >= thr.
          double best = thr - 1e-12;
          std::size_t best_j = it->second.size();
          for (std::size_t j = 0; j < it->second.size(); ++j) {
            if (used[j]) continue;
            double overlap = iou(pred.box, gts[it->second[j]].box);
            if (overlap > best) {
              best = overlap;
              best_j = j;
            }
          }
          if (best_j < it->second.size()) {
            used[best_j] = true;
            matched = true;
          }
        }
        tp_flags.push_back(matched ? 1 : 0);
      }
      ap_over_thresholds += average_precision(std::move(tp_flags), gt_count);
    }
    double ap = ap_over_thresholds / kThresholdCount;
    report.per_class[cls] = ap;
    ap_sum += ap;
    ++present_classes;
  }

  report.map = present_classes > 0 ? ap_sum / present_classes : 0.0;
  return report;
}

}  // namespace doctags
