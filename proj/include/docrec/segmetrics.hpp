// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <vector>

#include "docrec/errors.hpp"

namespace docrec::segmetrics {

/// Closed integer-pixel rectangle; areas are counted in pixels, so a
/// box with x_min == x_max is one pixel wide.
struct BBox {
  long x_min = 0;
  long y_min = 0;
  long x_max = 0;
  long y_max = 0;
  int class_id = 0;

  long area() const { return (x_max - x_min + 1) * (y_max - y_min + 1); }
};

struct ScoredPrediction {
  BBox box;
  double confidence = 0.0;
};

enum class MapWeighting { items, pixels };

/// Intersection area over union area. Boxes with empty intersection
/// give 0; a degenerate zero-area union is defined as 0.
double iou(const BBox& a, const BBox& b);

/// Interpolated average precision for one class at one IoU threshold.
/// Predictions are matched greedily in descending confidence order
/// (ties by input order); a prediction is a true positive when its IoU
/// with some unconsumed ground-truth box reaches the threshold, and it
/// consumes the box with the highest IoU among those. With no ground
/// truth the result is 0.
double average_precision(const std::vector<ScoredPrediction>& preds,
                         const std::vector<BBox>& gts, double iou_threshold);

/// Area under the interpolated precision/recall curve for an ordered
/// sequence of TP/FP outcomes against n_gt ground-truth items. Shared
/// by average_precision and the CER-thresholded variant in the layout
/// module.
double interpolated_ap(const std::vector<bool>& is_tp, std::size_t n_gt);

/// Default IoU thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> default_iou_thresholds();

/// Mean over thresholds of the weighted class-mean AP. Weights are the
/// ground-truth item counts or pixel counts per class. Throws
/// UndefinedMetricError when there are no classes with ground truth.
double map(const std::map<int, std::vector<ScoredPrediction>>& preds_by_class,
           const std::map<int, std::vector<BBox>>& gts_by_class,
           const std::vector<double>& thresholds = default_iou_thresholds(),
           MapWeighting weighting = MapWeighting::items);

}  // namespace docrec::segmetrics
