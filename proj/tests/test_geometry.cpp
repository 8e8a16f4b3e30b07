#include "doctest.h"

#include "doctags/geometry.hpp"

#include <cmath>

#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace doctags;

TEST_CASE("encode_loc: worked examples") {
  SUBCASE("full page maps to the full grid") {
    PixelBox box{0, 0, 612, 792, 612, 792};
    CHECK(encode_loc(box) == LocBox{0, 0, 500, 500});
  }
  SUBCASE("zero-area midpoint box") {
    PixelBox box{306, 396, 306, 396, 612, 792};
    CHECK(encode_loc(box) == LocBox{250, 250, 250, 250});
  }
  SUBCASE("proportional mapping") {
    PixelBox box{100, 50, 300, 150, 1000, 500};
    CHECK(encode_loc(box) == LocBox{50, 50, 150, 150});
  }
  SUBCASE("non-positive page dimensions are rejected") {
    CHECK_THROWS_AS(encode_loc(PixelBox{0, 0, 1, 1, 0, 100}), std::invalid_argument);
    CHECK_THROWS_AS(decode_loc(LocBox{0, 0, 1, 1}, 100, -5), std::invalid_argument);
  }
  SUBCASE("coordinates clamp to the grid") {
    PixelBox box{-40, 0, 2000, 792, 612, 792};
    LocBox loc = encode_loc(box);
    CHECK(loc.x1 == 0);
    CHECK(loc.x2 == 500);
  }
}

TEST_CASE("decode_loc mirrors encode_loc") {
  PixelBox box = decode_loc(LocBox{50, 50, 150, 150}, 1000, 500);
  CHECK(box.x1 == doctest::Approx(100));
  CHECK(box.y1 == doctest::Approx(50));
  CHECK(box.x2 == doctest::Approx(300));
  CHECK(box.y2 == doctest::Approx(150));
}

TEST_CASE("encode_loc(decode_loc(loc)) is the identity on the grid") {
  testgen::Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    LocBox loc = testgen::random_locbox(rng);
    double w = std::uniform_real_distribution<double>(8.0, 5000.0)(rng);
    double h = std::uniform_real_distribution<double>(8.0, 5000.0)(rng);
    PixelBox px = decode_loc(loc, w, h);
    CHECK(encode_loc(px) == loc);
  }
}

TEST_CASE("iou: worked examples") {
  Rect a{0, 0, 2, 2};
  CHECK(iou(a, a) == doctest::Approx(1.0));
  CHECK(iou(a, Rect{3, 3, 5, 5}) == doctest::Approx(0.0));
  CHECK(iou(a, Rect{1, 1, 3, 3}) == doctest::Approx(1.0 / 7.0));
  CHECK(iou(LocBox{0, 0, 2, 2}, LocBox{1, 1, 3, 3}) == doctest::Approx(1.0 / 7.0));
  // Zero-area boxes score zero even when identical.
  Rect point{1, 1, 1, 1};
  CHECK(iou(point, point) == 0.0);
}

TEST_CASE("iou is symmetric and bounded") {
  testgen::Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    auto rnd_rect = [&rng] {
      double x1 = testgen::pick(rng, 0, 400);
      double y1 = testgen::pick(rng, 0, 400);
      return Rect{x1, y1, x1 + testgen::pick(rng, 0, 100), y1 + testgen::pick(rng, 0, 100)};
    };
    Rect a = rnd_rect(), b = rnd_rect();
    double ab = iou(a, b);
    CHECK(ab == iou(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

namespace {

Detection det(const std::string& image, const std::string& label, Rect box,
              std::optional<double> score = std::nullopt) {
  return Detection{image, label, box, score};
}

const std::vector<std::string> kClasses = {"Text", "Table"};

}  // namespace

TEST_CASE("evaluate_map: worked examples") {
  SUBCASE("one perfect detection") {
    std::vector<Detection> gts = {det("p1", "Text", {0, 0, 10, 10})};
    std::vector<Detection> preds = {det("p1", "Text", {0, 0, 10, 10}, 0.9)};
    MapReport report = evaluate_map(preds, gts, kClasses);
    CHECK(report.map == doctest::Approx(1.0));
    CHECK(*report.per_class.at("Text") == doctest::Approx(1.0));
    CHECK(!report.per_class.at("Table").has_value());
  }
  SUBCASE("no predictions scores zero") {
    std::vector<Detection> gts = {det("p1", "Text", {0, 0, 10, 10})};
    MapReport report = evaluate_map({}, gts, kClasses);
    CHECK(report.map == doctest::Approx(0.0));
  }
  SUBCASE("false positive after full recall keeps AP at 1") {
    std::vector<Detection> gts = {det("p1", "Text", {0, 0, 10, 10})};
    std::vector<Detection> preds = {det("p1", "Text", {0, 0, 10, 10}, 0.9),
                                    det("p1", "Text", {50, 50, 60, 60}, 0.8)};
    MapReport report = evaluate_map(preds, gts, kClasses);
    CHECK(report.map == doctest::Approx(1.0));
  }
  SUBCASE("unknown labels are diagnosed and ignored") {
    std::vector<Detection> gts = {det("p1", "Text", {0, 0, 10, 10})};
    std::vector<Detection> preds = {det("p1", "Martian", {0, 0, 10, 10}, 0.9)};
    MapReport report = evaluate_map(preds, gts, kClasses);
    CHECK(!report.diagnostics.empty());
    CHECK(report.map == doctest::Approx(0.0));
  }
}

namespace {

struct SyntheticSet {
  std::vector<Detection> preds;
  std::vector<Detection> gts;
};

SyntheticSet synthetic_detections(testgen::Rng& rng, int images) {
  SyntheticSet set;
  for (int img = 0; img < images; ++img) {
    std::string id = "img" + std::to_string(img);
    int n_gt = testgen::pick(rng, 0, 6);
    for (int g = 0; g < n_gt; ++g) {
      double x1 = testgen::pick(rng, 0, 400);
      double y1 = testgen::pick(rng, 0, 400);
      Rect box{x1, y1, x1 + testgen::pick(rng, 10, 120), y1 + testgen::pick(rng, 10, 120)};
      std::string label = kClasses[static_cast<std::size_t>(testgen::pick(rng, 0, 1))];
      set.gts.push_back(det(id, label, box));
      // Jittered or displaced prediction.
      if (testgen::chance(rng, 0.8)) {
        double dx = testgen::pick(rng, -20, 20);
        double dy = testgen::pick(rng, -20, 20);
        Rect pbox{box.x1 + dx, box.y1 + dy, box.x2 + dx, box.y2 + dy};
        set.preds.push_back(det(id, label, pbox,
                                std::uniform_real_distribution<double>(0.1, 1.0)(rng)));
      }
    }
    int extra = testgen::pick(rng, 0, 3);
    for (int e = 0; e < extra; ++e) {
      double x1 = testgen::pick(rng, 0, 400);
      double y1 = testgen::pick(rng, 0, 400);
      set.preds.push_back(det(id, kClasses[static_cast<std::size_t>(testgen::pick(rng, 0, 1))],
                              Rect{x1, y1, x1 + 40, y1 + 40},
                              std::uniform_real_distribution<double>(0.1, 1.0)(rng)));
    }
  }
  return set;
}

}  // namespace

TEST_CASE("evaluate_map matches the reference implementation on synthetic sets") {
  testgen::Rng rng(20240601);
  for (int round = 0; round < 10; ++round) {
    SyntheticSet set = synthetic_detections(rng, 10);
    MapReport report = evaluate_map(set.preds, set.gts, kClasses);
    double reference = oracle::reference_map(set.preds, set.gts, kClasses);
    CHECK(report.map == doctest::Approx(reference).epsilon(1e-6));
  }
}

TEST_CASE("evaluate_map is invariant to prediction order and uniform rescaling") {
  testgen::Rng rng(31);
  SyntheticSet set = synthetic_detections(rng, 8);
  MapReport base = evaluate_map(set.preds, set.gts, kClasses);

  std::vector<Detection> shuffled = set.preds;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  // Stable tie-break uses input order, so shuffling only matters for
  // exact score ties; regenerate distinct scores to sidestep that.
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    shuffled[i].score = 0.9 - 1e-4 * static_cast<double>(i);
  }
  std::vector<Detection> reordered = shuffled;
  std::reverse(reordered.begin(), reordered.end());
  MapReport a = evaluate_map(shuffled, set.gts, kClasses);
  MapReport b = evaluate_map(reordered, set.gts, kClasses);
  CHECK(a.map == doctest::Approx(b.map).epsilon(1e-12));

  auto scale = [](std::vector<Detection> dets, double f) {
    for (Detection& d : dets) {
      d.box = Rect{d.box.x1 * f, d.box.y1 * f, d.box.x2 * f, d.box.y2 * f};
    }
    return dets;
  };
  MapReport scaled = evaluate_map(scale(set.preds, 3.5), scale(set.gts, 3.5), kClasses);
  CHECK(scaled.map == doctest::Approx(base.map).epsilon(1e-9));
}
