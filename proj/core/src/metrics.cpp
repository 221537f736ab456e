#include "flowsub/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>

namespace flowsub {

namespace {

std::vector<int> sorted_unique_labels(const std::vector<int>& labels) {
  std::vector<int> unique = labels;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  return unique;
}

int index_of(const std::vector<int>& sorted, int value) {
  return static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), value) - sorted.begin());
}

std::int64_t pairs_of(std::int64_t n) { return n * (n - 1) / 2; }

/// Minimum-cost one-to-one assignment on a square matrix via shortest
/// augmenting paths with potentials. Rows are introduced in ascending index
/// and ties in the path search resolve to the lowest column index, so the
/// matching is deterministic. Returns match[col] = row.
std::vector<int> solve_assignment_min(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> match(n, -1);
  for (int j = 1; j <= n; ++j) match[j - 1] = p[j] - 1;
  return match;
}

struct SegmentOverlap {
  std::vector<int> pred_labels, gt_labels;
  std::vector<std::int64_t> pred_sizes, gt_sizes;
  std::vector<std::vector<std::int64_t>> counts;  // pred x gt
};

SegmentOverlap overlap_table(const LabelGrid& pred, const LabelGrid& gt) {
  SegmentOverlap table;
  table.pred_labels = sorted_unique_labels(pred.labels);
  table.gt_labels = sorted_unique_labels(gt.labels);
  table.pred_sizes.assign(table.pred_labels.size(), 0);
  table.gt_sizes.assign(table.gt_labels.size(), 0);
  table.counts.assign(table.pred_labels.size(),
                      std::vector<std::int64_t>(table.gt_labels.size(), 0));
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const int pi = index_of(table.pred_labels, pred.labels[i]);
    const int gi = index_of(table.gt_labels, gt.labels[i]);
    ++table.pred_sizes[pi];
    ++table.gt_sizes[gi];
    ++table.counts[pi][gi];
  }
  return table;
}

/// Matched-IoU sum and divisor for a subset of segments on each side.
double matched_iou_mean(const SegmentOverlap& table, const std::vector<int>& pred_keep,
                        const std::vector<int>& gt_keep, std::size_t divisor) {
  if (divisor == 0) return 0.0;
  const int n = static_cast<int>(std::max(pred_keep.size(), gt_keep.size()));
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < pred_keep.size(); ++a) {
    for (std::size_t b = 0; b < gt_keep.size(); ++b) {
      const std::int64_t inter = table.counts[pred_keep[a]][gt_keep[b]];
      const std::int64_t uni =
          table.pred_sizes[pred_keep[a]] + table.gt_sizes[gt_keep[b]] - inter;
      cost[a][b] = uni > 0 ? -static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
    }
  }
  const std::vector<int> match = solve_assignment_min(cost);

  // sum in ascending ground-truth order so ties cannot reorder the summation
  double total = 0.0;
  for (std::size_t b = 0; b < gt_keep.size(); ++b) {
    const int a = match[b];
    if (a >= 0 && a < static_cast<int>(pred_keep.size())) total += -cost[a][b];
  }
  return total / static_cast<double>(divisor);
}

}  // namespace

double fg_ari(const LabelGrid& pred, const LabelGrid& gt) {
  if (!pred.same_shape(gt)) throw Error(ErrorCode::kDimensionMismatch, "label grids disagree");

  LabelGrid pred_fg(0, 0), gt_fg(0, 0);
  pred_fg.labels.reserve(pred.size());
  gt_fg.labels.reserve(gt.size());
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    if (gt.labels[i] == gt.background_label) continue;
    pred_fg.labels.push_back(pred.labels[i]);
    gt_fg.labels.push_back(gt.labels[i]);
  }
  if (gt_fg.labels.empty())
    throw Error(ErrorCode::kEmptyForeground, "ground truth has no foreground pixels");

  const SegmentOverlap table = overlap_table(pred_fg, gt_fg);
  const std::int64_t n = static_cast<std::int64_t>(gt_fg.labels.size());

  std::int64_t index = 0, sum_pred = 0, sum_gt = 0;
  for (std::size_t a = 0; a < table.counts.size(); ++a)
    for (std::size_t b = 0; b < table.counts[a].size(); ++b) index += pairs_of(table.counts[a][b]);
  for (std::int64_t size : table.pred_sizes) sum_pred += pairs_of(size);
  for (std::int64_t size : table.gt_sizes) sum_gt += pairs_of(size);

  const std::int64_t total_pairs = pairs_of(n);
  if (total_pairs == 0) return 1.0;  // single foreground pixel

  const double expected =
      static_cast<double>(sum_pred) * static_cast<double>(sum_gt) / static_cast<double>(total_pairs);
  const double numerator = static_cast<double>(index) - expected;
  const double denominator = 0.5 * (static_cast<double>(sum_pred) + static_cast<double>(sum_gt)) - expected;
  // denominator vanishes only when both partitions are trivial in the same
  // way (both one cluster, or both all singletons), i.e. identical
  if (denominator == 0.0) return 1.0;
  return numerator / denominator;
}

double hungarian_miou(const LabelGrid& pred, const LabelGrid& gt) {
  if (!pred.same_shape(gt)) throw Error(ErrorCode::kDimensionMismatch, "label grids disagree");
  if (pred.labels.empty()) return 0.0;

  const SegmentOverlap table = overlap_table(pred, gt);
  std::vector<int> pred_all(table.pred_labels.size()), gt_all(table.gt_labels.size());
  for (std::size_t i = 0; i < pred_all.size(); ++i) pred_all[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < gt_all.size(); ++i) gt_all[i] = static_cast<int>(i);
  return matched_iou_mean(table, pred_all, gt_all, std::max(pred_all.size(), gt_all.size()));
}

double jaccard_j(const LabelGrid& pred, const LabelGrid& gt) {
  if (!pred.same_shape(gt)) throw Error(ErrorCode::kDimensionMismatch, "label grids disagree");
  if (pred.labels.empty()) return 0.0;

  const SegmentOverlap table = overlap_table(pred, gt);
  std::vector<int> pred_objects, gt_objects;
  for (std::size_t i = 0; i < table.pred_labels.size(); ++i)
    if (table.pred_labels[i] != pred.background_label) pred_objects.push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < table.gt_labels.size(); ++i)
    if (table.gt_labels[i] != gt.background_label) gt_objects.push_back(static_cast<int>(i));

  if (gt_objects.empty()) return pred_objects.empty() ? 1.0 : 0.0;
  return matched_iou_mean(table, pred_objects, gt_objects, gt_objects.size());
}

SegReport segmentation_report(const LabelGrid& pred, const LabelGrid& gt) {
  return {fg_ari(pred, gt), hungarian_miou(pred, gt), jaccard_j(pred, gt)};
}

namespace {

double midpoint_median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

DepthReport depth_metrics(const ScalarGrid& pred, const ScalarGrid& gt_depth,
                          const DepthEvalOptions& options) {
  if (!pred.same_shape(gt_depth)) throw Error(ErrorCode::kDimensionMismatch, "depth grids disagree");
  if (!(options.cap_m > 0.0)) throw Error(ErrorCode::kParamOutOfRange, "cap must be > 0");

  std::vector<double> pred_depth, gt_valid;
  pred_depth.reserve(pred.size());
  gt_valid.reserve(pred.size());
  for (std::size_t i = 0; i < gt_depth.size(); ++i) {
    const double g = gt_depth.data()[i];
    if (!std::isfinite(g) || g <= 0.0) continue;
    double p = pred.data()[i];
    if (std::isnan(p)) throw Error(ErrorCode::kNonFiniteInput, "prediction is NaN on a valid pixel");
    if (options.pred_encoding == DepthEncoding::kDisparity) p = 1.0 / p;  // d == 0 caps later
    pred_depth.push_back(p);
    gt_valid.push_back(g);
  }
  if (gt_valid.empty()) throw Error(ErrorCode::kEmptyValidMask, "no valid ground-truth pixels");

  double scale = 1.0;
  if (options.median_scale) {
    const double median_pred = midpoint_median(pred_depth);
    const double median_gt = midpoint_median(gt_valid);
    if (!std::isfinite(median_pred) || median_pred <= 0.0)
      throw Error(ErrorCode::kNonFiniteInput, "prediction median unusable for scaling");
    scale = median_gt / median_pred;
  }

  DepthReport report;
  report.scale_applied = scale;
  report.n_pixels_evaluated = static_cast<long>(gt_valid.size());

  const auto clamp_depth = [&](double x) {
    return std::min(std::max(x, options.epsilon_m), options.cap_m);
  };

  double abs_rel = 0, sq_rel = 0, sq = 0, sq_log = 0, l10 = 0;
  long d1 = 0, d2 = 0, d3 = 0;
  for (std::size_t i = 0; i < gt_valid.size(); ++i) {
    const double p = clamp_depth(pred_depth[i] * scale);
    const double g = clamp_depth(gt_valid[i]);
    const double diff = p - g;
    abs_rel += std::abs(diff) / g;
    sq_rel += diff * diff / g;
    sq += diff * diff;
    const double log_diff = std::log(p) - std::log(g);
    sq_log += log_diff * log_diff;
    l10 += std::abs(std::log10(p) - std::log10(g));
    const double ratio = std::max(p / g, g / p);
    d1 += ratio < 1.25;
    d2 += ratio < 1.25 * 1.25;
    d3 += ratio < 1.25 * 1.25 * 1.25;
  }
  const double n = static_cast<double>(gt_valid.size());
  report.abs_rel = abs_rel / n;
  report.sq_rel = sq_rel / n;
  report.rmse = std::sqrt(sq / n);
  report.rmse_log = std::sqrt(sq_log / n);
  report.log10 = l10 / n;
  report.delta1 = d1 / n;
  report.delta2 = d2 / n;
  report.delta3 = d3 / n;
  return report;
}

namespace {

LabelGrid postprocess_single_pass(const LabelGrid& labels, int k, double min_frac,
                                  Connectivity connectivity) {
  const int h = labels.height, w = labels.width;
  std::vector<int> component(static_cast<std::size_t>(h) * w, -1);

  struct Component {
    int label = 0;
    int first_pixel = 0;
    std::int64_t size = 0;
  };
  std::vector<Component> components;

  const int dr4[] = {-1, 1, 0, 0}, dc4[] = {0, 0, -1, 1};
  const int dr8[] = {-1, 1, 0, 0, -1, -1, 1, 1}, dc8[] = {0, 0, -1, 1, -1, 1, -1, 1};
  const int neighbor_count = connectivity == Connectivity::kFour ? 4 : 8;
  const int* dr = connectivity == Connectivity::kFour ? dr4 : dr8;
  const int* dc = connectivity == Connectivity::kFour ? dc4 : dc8;

  for (int start = 0; start < h * w; ++start) {
    if (component[start] >= 0) continue;
    const int id = static_cast<int>(components.size());
    Component comp{labels.labels[start], start, 0};
    std::queue<int> frontier;
    frontier.push(start);
    component[start] = id;
    while (!frontier.empty()) {
      const int pixel = frontier.front();
      frontier.pop();
      ++comp.size;
      const int r = pixel / w, c = pixel % w;
      for (int t = 0; t < neighbor_count; ++t) {
        const int rr = r + dr[t], cc = c + dc[t];
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        const int neighbor = rr * w + cc;
        if (component[neighbor] >= 0 || labels.labels[neighbor] != comp.label) continue;
        component[neighbor] = id;
        frontier.push(neighbor);
      }
    }
    components.push_back(comp);
  }

  std::vector<int> order(components.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (components[a].size != components[b].size) return components[a].size > components[b].size;
    if (components[a].label != components[b].label) return components[a].label < components[b].label;
    return components[a].first_pixel < components[b].first_pixel;
  });

  const double min_pixels = min_frac * static_cast<double>(h) * static_cast<double>(w);
  std::vector<char> keep(components.size(), 0);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (rank >= static_cast<std::size_t>(k)) break;
    const Component& comp = components[order[rank]];
    // the largest component always survives; it is also the merge target
    if (rank > 0 && static_cast<double>(comp.size) < min_pixels) continue;
    keep[order[rank]] = 1;
  }
  const int target_label = components[order[0]].label;

  LabelGrid out = labels;
  for (int i = 0; i < h * w; ++i)
    if (!keep[component[i]]) out.labels[i] = target_label;
  return out;
}

}  // namespace

LabelGrid postprocess_masks(const LabelGrid& labels, int k, double min_frac,
                            Connectivity connectivity) {
  if (!(min_frac > 0.0 && min_frac < 1.0))
    throw Error(ErrorCode::kParamOutOfRange, "min_frac must lie in (0, 1)");
  if (k < 1) throw Error(ErrorCode::kParamOutOfRange, "need K >= 1");
  if (labels.labels.empty()) return labels;

  // Relabeled pixels can fuse into components that change the next keep-set,
  // so a single cleanup pass is not a projection. Iterating to a fixed point
  // is; it converges in a handful of passes.
  LabelGrid current = labels;
  for (int pass = 0; pass < 256; ++pass) {
    LabelGrid next = postprocess_single_pass(current, k, min_frac, connectivity);
    if (next.labels == current.labels) break;
    current = std::move(next);
  }
  return current;
}

}  // namespace flowsub
