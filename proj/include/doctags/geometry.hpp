#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "doctags/diagnostics.hpp"
#include "doctags/model.hpp"

namespace doctags {

/// Axis-aligned box in an arbitrary but consistent coordinate system.
struct Rect {
  double x1 = 0;
  double y1 = 0;
  double x2 = 0;
  double y2 = 0;

  double area() const;

  bool operator==(const Rect&) const = default;
};

/// Box in page pixels together with the page it lives on.
struct PixelBox {
  double x1 = 0;
  double y1 = 0;
  double x2 = 0;
  double y2 = 0;
  double page_width = 1;
  double page_height = 1;

  Rect rect() const { return Rect{x1, y1, x2, y2}; }
};

/// Quantizes to the 0..500 grid: round(coord / page_dim * 500) with
/// ties away from zero, clamped; a degenerate box whose corners invert
/// under rounding is re-ordered. Throws std::invalid_argument on
/// non-positive page dimensions.
LocBox encode_loc(const PixelBox& box);

/// coord * page_dim / 500 — inverse of encode_loc up to quantization
/// error of at most page_dim/1000 per coordinate. Throws on
/// non-positive page dimensions.
PixelBox decode_loc(const LocBox& loc, double page_width, double page_height);

/// Area-based intersection over union; 0 for disjoint or zero-area
/// boxes (including identical point boxes).
double iou(const Rect& a, const Rect& b);
double iou(const LocBox& a, const LocBox& b);

struct Detection {
  std::string image_id;
  std::string label;
  Rect box;
  std::optional<double> score;  // present on predictions, absent on ground truth
};

struct MapReport {
  // AP per class averaged over the 10 IoU thresholds 0.50:0.05:0.95;
  // absent for classes with no ground-truth instances.
  std::map<std::string, std::optional<double>> per_class;
  double map = 0.0;  // mean over classes with ground truth
  std::vector<Diagnostic> diagnostics;
};

/// Detection matching per class per image: predictions in descending
/// score (ties by input order) greedily take the unused ground-truth
/// box of highest IoU when it reaches the threshold. AP is the
/// 101-point interpolated area under the pooled precision-recall
/// curve, averaged over thresholds; detections with labels outside
/// `classes` are dropped with a diagnostic.
MapReport evaluate_map(std::span<const Detection> preds, std::span<const Detection> gts,
                       std::span<const std::string> classes);

}  // namespace doctags
