#pragma once

#include <vector>

#include "flowsub/grid.hpp"

namespace flowsub {

/// Adjusted Rand Index restricted to pixels whose ground-truth label differs
/// from gt.background_label. Permutation-invariant; throws EmptyForeground
/// when no foreground pixel exists. Degenerate contingency tables (both
/// partitions trivial, denominator zero) are defined as 1.0.
double fg_ari(const LabelGrid& pred, const LabelGrid& gt);

/// Mean IoU after maximum-weight one-to-one matching of predicted to
/// ground-truth segments, divided by max(#gt, #pred) segments. Every distinct
/// label is a segment. Empty grids evaluate to 0. A single-frame call makes
/// the per-image and pooled aggregations of the divisor coincide.
double hungarian_miou(const LabelGrid& pred, const LabelGrid& gt);

/// Per-frame region similarity: mean IoU over ground-truth objects (labels
/// other than gt.background_label) after one-to-one matching against the
/// prediction's non-background segments. Unmatched objects score 0.
double jaccard_j(const LabelGrid& pred, const LabelGrid& gt);

struct SegReport {
  double fg_ari = 0.0;
  double miou = 0.0;
  double j_mean = 0.0;
};

SegReport segmentation_report(const LabelGrid& pred, const LabelGrid& gt);

struct DepthReport {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double log10 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  long n_pixels_evaluated = 0;
  double scale_applied = 1.0;
};

enum class DepthEncoding { kDepth, kDisparity };

struct DepthEvalOptions {
  double cap_m = 10.0;        // depths are clamped to (epsilon_m, cap_m]
  bool median_scale = true;   // rescale pred by median(gt)/median(pred) first
  DepthEncoding pred_encoding = DepthEncoding::kDisparity;
  double epsilon_m = 1e-3;
};

/// Standard monocular-depth error suite. Valid pixels are those with finite,
/// positive ground truth. Median scaling happens before capping, which makes
/// the report exactly invariant to positive rescaling of the prediction.
DepthReport depth_metrics(const ScalarGrid& pred, const ScalarGrid& gt_depth,
                          const DepthEvalOptions& options);

enum class Connectivity { kFour, kEight };

/// Connected-component cleanup: keeps the largest K components, relabels
/// everything else (including components below min_frac of the image) to the
/// largest component's label. Idempotent.
LabelGrid postprocess_masks(const LabelGrid& labels, int k, double min_frac = 0.001,
                            Connectivity connectivity = Connectivity::kFour);

}  // namespace flowsub
