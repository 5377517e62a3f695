// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "docrec/segmetrics.hpp"

#include <algorithm>
#include <numeric>

namespace docrec::segmetrics {

double iou(const BBox& a, const BBox& b) {
  long ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min) + 1;
  long iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min) + 1;
  long inter = (ix > 0 && iy > 0) ? ix * iy : 0;
  long uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double interpolated_ap(const std::vector<bool>& is_tp, std::size_t n_gt) {
  if (n_gt == 0 || is_tp.empty()) return 0.0;
  const std::size_t k = is_tp.size();
  std::vector<double> precision(k), recall(k);
  std::size_t tp = 0;
  for (std::size_t n = 0; n < k; ++n) {
    if (is_tp[n]) ++tp;
    precision[n] = static_cast<double>(tp) / static_cast<double>(n + 1);
    recall[n] = static_cast<double>(tp) / static_cast<double>(n_gt);
  }
  // p_interp(r) = max precision over measured points with recall >= r;
  // suffix maximum since recall is non-decreasing in rank order.
  std::vector<double> p_interp(k);
  double running = 0.0;
  for (std::size_t n = k; n-- > 0;) {
    running = std::max(running, precision[n]);
    p_interp[n] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t n = 0; n < k; ++n) {
    ap += (recall[n] - prev_recall) * p_interp[n];
    prev_recall = recall[n];
  }
  return ap;
}

double average_precision(const std::vector<ScoredPrediction>& preds,
                         const std::vector<BBox>& gts, double iou_threshold) {
  if (iou_threshold <= 0.0 || iou_threshold > 1.0)
    throw ConfigError("iou threshold must be in (0, 1]");
  if (gts.empty()) return 0.0;

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].confidence > preds[b].confidence;
  });

  std::vector<bool> consumed(gts.size(), false);
  std::vector<bool> is_tp(preds.size(), false);
  for (std::size_t n = 0; n < order.size(); ++n) {
    const auto& p = preds[order[n]];
    double best = 0.0;
    std::size_t best_g = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (consumed[g]) continue;
      double v = iou(p.box, gts[g]);
      if (v >= iou_threshold && v > best) {
        best = v;
        best_g = g;
      }
    }
    if (best_g < gts.size()) {
      consumed[best_g] = true;
      is_tp[n] = true;
    }
  }
  return interpolated_ap(is_tp, gts.size());
}

std::vector<double> default_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.50 + 0.05 * i);
  return t;
}

double map(const std::map<int, std::vector<ScoredPrediction>>& preds_by_class,
           const std::map<int, std::vector<BBox>>& gts_by_class,
           const std::vector<double>& thresholds, MapWeighting weighting) {
  static const std::vector<ScoredPrediction> kNoPreds;
  double weight_sum = 0.0;
  std::map<int, double> weights;
  for (const auto& [cls, boxes] : gts_by_class) {
    double w = 0.0;
    if (weighting == MapWeighting::items) {
      w = static_cast<double>(boxes.size());
    } else {
      for (const auto& b : boxes) w += static_cast<double>(b.area());
    }
    weights[cls] = w;
    weight_sum += w;
  }
  if (weight_sum <= 0.0)
    throw UndefinedMetricError("map undefined: no ground-truth classes");

  double total = 0.0;
  for (double th : thresholds) {
    double acc = 0.0;
    for (const auto& [cls, boxes] : gts_by_class) {
      auto it = preds_by_class.find(cls);
      const auto& preds = it == preds_by_class.end() ? kNoPreds : it->second;
      acc += weights[cls] * average_precision(preds, boxes, th);
    }
    total += acc / weight_sum;
  }
  return total / static_cast<double>(thresholds.size());
}

}  // namespace docrec::segmetrics
