// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "docrec/rng.hpp"
#include "docrec/segmetrics.hpp"
#include "oracles.hpp"

using namespace docrec;
using namespace docrec::segmetrics;

namespace {

BBox box(long x0, long y0, long x1, long y1, int cls = 0) {
  return {x0, y0, x1, y1, cls};
}

BBox random_box(Rng& rng, long span = 12) {
  long x0 = rng.next_range(0, span), y0 = rng.next_range(0, span);
  return box(x0, y0, x0 + rng.next_range(0, 5), y0 + rng.next_range(0, 5));
}

// The worked seven-prediction instance: hit pattern TP FP TP TP FP TP FP
// over four ground-truth boxes.
struct WorkedExample {
  std::vector<ScoredPrediction> preds;
  std::vector<BBox> gts;
};

WorkedExample worked_example() {
  WorkedExample ex;
  // Four disjoint ground-truth boxes, far apart.
  for (int g = 0; g < 4; ++g) ex.gts.push_back(box(g * 100, 0, g * 100 + 9, 9));
  auto hit = [&](int g) { return ex.gts[static_cast<std::size_t>(g)]; };
  auto miss = [&](int g) { return box(g * 100 + 40, 40, g * 100 + 49, 49); };
  ex.preds = {
      {hit(0), 0.95}, {miss(0), 0.90}, {hit(1), 0.85}, {hit(2), 0.80},
      {miss(1), 0.75}, {hit(3), 0.70}, {miss(2), 0.65},
  };
  return ex;
}

}  // namespace

TEST_CASE("iou goldens") {
  CHECK(iou(box(0, 0, 9, 9), box(0, 0, 9, 9)) == doctest::Approx(1.0));
  CHECK(iou(box(0, 0, 4, 4), box(20, 20, 24, 24)) == doctest::Approx(0.0));
  // Two-pixel squares sharing one pixel: 1 / 3.
  CHECK(iou(box(0, 0, 1, 0), box(1, 0, 2, 0)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("iou matches the pixel-counting oracle and is symmetric") {
  Rng rng(211);
  for (int trial = 0; trial < 300; ++trial) {
    BBox a = random_box(rng), b = random_box(rng);
    CHECK(iou(a, b) == doctest::Approx(oracles::iou_pixels(a, b)).epsilon(1e-12));
    CHECK(iou(a, b) == doctest::Approx(iou(b, a)));
  }
}

TEST_CASE("the seven-prediction worked example gives AP 0.791667") {
  WorkedExample ex = worked_example();
  double ap = average_precision(ex.preds, ex.gts, 0.5);
  CHECK(ap == doctest::Approx(0.7916666666667).epsilon(1e-9));
  // Same value straight from the TP/FP pattern.
  CHECK(interpolated_ap({true, false, true, true, false, true, false}, 4) ==
        doctest::Approx(0.7916666666667).epsilon(1e-9));
}

TEST_CASE("all predictions matching perfectly gives AP 1") {
  std::vector<BBox> gts;
  std::vector<ScoredPrediction> preds;
  for (int g = 0; g < 5; ++g) {
    gts.push_back(box(g * 50, 0, g * 50 + 9, 9));
    preds.push_back({gts.back(), 1.0 - 0.1 * g});
  }
  CHECK(average_precision(preds, gts, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("predictions against an empty ground truth score zero") {
  std::vector<ScoredPrediction> preds{{box(0, 0, 4, 4), 0.9}};
  CHECK(average_precision(preds, {}, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("invalid thresholds are rejected") {
  CHECK_THROWS_AS(average_precision({}, {box(0, 0, 1, 1)}, 0.0), ConfigError);
  CHECK_THROWS_AS(average_precision({}, {box(0, 0, 1, 1)}, 1.5), ConfigError);
}

TEST_CASE("AP agrees with the direct-integration oracle on random instances") {
  Rng rng(223);
  for (int trial = 0; trial < 150; ++trial) {
    std::vector<BBox> gts;
    std::vector<ScoredPrediction> preds;
    int n_gt = 1 + static_cast<int>(rng.next_below(5));
    int n_pred = static_cast<int>(rng.next_below(6));
    for (int g = 0; g < n_gt; ++g) gts.push_back(random_box(rng));
    for (int p = 0; p < n_pred; ++p)
      preds.push_back({random_box(rng), rng.next_double()});
    double threshold = 0.3 + 0.4 * rng.next_double();

    // Re-run the matching with an independent transcription of the
    // rules, then integrate the curve quadratically.
    std::vector<std::size_t> order(preds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return preds[a].confidence > preds[b].confidence;
    });
    std::vector<bool> used(gts.size(), false), flags;
    for (std::size_t idx : order) {
      double best = 0.0;
      std::size_t arg = gts.size();
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (used[g]) continue;
        double v = oracles::iou_pixels(preds[idx].box, gts[g]);
        if (v >= threshold && v > best) {
          best = v;
          arg = g;
        }
      }
      flags.push_back(arg < gts.size());
      if (arg < gts.size()) used[arg] = true;
    }
    double expected = oracles::ap_direct(flags, gts.size());
    CHECK(average_precision(preds, gts, threshold) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("AP never increases when the IoU threshold grows") {
  Rng rng(227);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<BBox> gts;
    std::vector<ScoredPrediction> preds;
    for (int g = 0; g < 4; ++g) gts.push_back(random_box(rng));
    for (int p = 0; p < 6; ++p) preds.push_back({random_box(rng), rng.next_double()});
    double prev = 2.0;
    for (double th : default_iou_thresholds()) {
      double ap = average_precision(preds, gts, th);
      CHECK(ap <= prev + 1e-12);
      prev = ap;
    }
  }
}

TEST_CASE("AP depends on the confidence order only") {
  WorkedExample ex = worked_example();
  double base = average_precision(ex.preds, ex.gts, 0.5);
  for (auto& p : ex.preds) p.confidence = 0.1 + p.confidence * p.confidence;
  CHECK(average_precision(ex.preds, ex.gts, 0.5) == doctest::Approx(base));
}

TEST_CASE("map reduces to AP for one class and one threshold") {
  WorkedExample ex = worked_example();
  std::map<int, std::vector<ScoredPrediction>> preds{{0, ex.preds}};
  std::map<int, std::vector<BBox>> gts{{0, ex.gts}};
  CHECK(map(preds, gts, {0.5}) ==
        doctest::Approx(average_precision(ex.preds, ex.gts, 0.5)));
}

TEST_CASE("map averages equally weighted classes") {
  WorkedExample a = worked_example();
  // A second class with a perfect single prediction.
  std::vector<BBox> gts_b;
  std::vector<ScoredPrediction> preds_b;
  for (int g = 0; g < 4; ++g) {
    gts_b.push_back(box(g * 70, 500, g * 70 + 9, 509, 1));
    preds_b.push_back({gts_b.back(), 0.9});
  }
  std::map<int, std::vector<ScoredPrediction>> preds{{0, a.preds}, {1, preds_b}};
  std::map<int, std::vector<BBox>> gts{{0, a.gts}, {1, gts_b}};
  double ap_a = average_precision(a.preds, a.gts, 0.5);
  CHECK(map(preds, gts, {0.5}) == doctest::Approx((ap_a + 1.0) / 2.0));
}

TEST_CASE("the threshold sweep is the mean of per-threshold APs") {
  WorkedExample ex = worked_example();
  std::map<int, std::vector<ScoredPrediction>> preds{{0, ex.preds}};
  std::map<int, std::vector<BBox>> gts{{0, ex.gts}};
  double hand = 0.0;
  for (double th : default_iou_thresholds())
    hand += average_precision(ex.preds, ex.gts, th);
  CHECK(map(preds, gts) == doctest::Approx(hand / 10.0));
}

TEST_CASE("map without ground truth classes is undefined") {
  std::map<int, std::vector<ScoredPrediction>> preds;
  std::map<int, std::vector<BBox>> gts;
  CHECK_THROWS_AS(map(preds, gts), UndefinedMetricError);
}

TEST_CASE("pixel weighting favors the larger class") {
  // Class 0: one large box, missed. Class 1: one small box, hit.
  std::map<int, std::vector<BBox>> gts{{0, {box(0, 0, 99, 99, 0)}},
                                       {1, {box(200, 0, 204, 4, 1)}}};
  std::map<int, std::vector<ScoredPrediction>> preds{
      {1, {{box(200, 0, 204, 4, 1), 0.9}}}};
  double items = map(preds, gts, {0.5}, MapWeighting::items);
  double pixels = map(preds, gts, {0.5}, MapWeighting::pixels);
  CHECK(items == doctest::Approx(0.5));
  CHECK(pixels < 0.01);  // the hit class is tiny in pixel terms
}
