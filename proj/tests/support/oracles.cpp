#include "support/oracles.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#include "flowsub/projector.hpp"

namespace oracles {

Eigen::VectorXd pseudoinverse_projection(const Eigen::MatrixXd& s, const Eigen::VectorXd& f,
                                         double sv_threshold) {
  const Eigen::MatrixXd gram = s.transpose() * s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  Eigen::VectorXd inverted = Eigen::VectorXd::Zero(gram.rows());
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    const double value = eig.eigenvalues()(i);
    if (value > 0.0 && std::sqrt(value) > sv_threshold) inverted(i) = 1.0 / value;
  }
  const Eigen::MatrixXd pinv =
      eig.eigenvectors() * inverted.asDiagonal() * eig.eigenvectors().transpose();
  return s * (pinv * (s.transpose() * f));
}

double pair_counting_fg_ari(const LabelGrid& pred, const LabelGrid& gt) {
  std::vector<int> p, g;
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    if (gt.labels[i] == gt.background_label) continue;
    p.push_back(pred.labels[i]);
    g.push_back(gt.labels[i]);
  }
  const std::size_t n = p.size();
  std::int64_t same_both = 0, same_pred = 0, same_gt = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++total;
      const bool sp = p[i] == p[j], sg = g[i] == g[j];
      same_pred += sp;
      same_gt += sg;
      same_both += sp && sg;
    }
  }
  if (total == 0) return 1.0;
  const double expected = static_cast<double>(same_pred) * static_cast<double>(same_gt) /
                          static_cast<double>(total);
  const double numerator = static_cast<double>(same_both) - expected;
  const double denominator =
      0.5 * (static_cast<double>(same_pred) + static_cast<double>(same_gt)) - expected;
  if (denominator == 0.0) return 1.0;
  return numerator / denominator;
}

namespace {

struct Segments {
  std::vector<int> labels;               // sorted unique
  std::vector<std::int64_t> sizes;
  std::map<std::pair<int, int>, std::int64_t> joint;  // (pred_label, gt_label) -> count
};

Segments segment_table(const LabelGrid& pred, const LabelGrid& gt, bool drop_pred_background,
                       bool drop_gt_background, std::vector<int>& gt_labels,
                       std::vector<std::int64_t>& gt_sizes) {
  Segments out;
  std::map<int, std::int64_t> pred_sizes, gt_size_map;
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    ++pred_sizes[pred.labels[i]];
    ++gt_size_map[gt.labels[i]];
    ++out.joint[{pred.labels[i], gt.labels[i]}];
  }
  for (const auto& [label, size] : pred_sizes) {
    if (drop_pred_background && label == pred.background_label) continue;
    out.labels.push_back(label);
    out.sizes.push_back(size);
  }
  for (const auto& [label, size] : gt_size_map) {
    if (drop_gt_background && label == gt.background_label) continue;
    gt_labels.push_back(label);
    gt_sizes.push_back(size);
  }
  return out;
}

double best_injection_sum(const Segments& pred_side, const std::vector<int>& gt_labels,
                          const std::vector<std::int64_t>& gt_sizes) {
  const std::size_t np = pred_side.labels.size(), ng = gt_labels.size();
  if (np == 0 || ng == 0) return 0.0;

  auto iou = [&](std::size_t a, std::size_t b) {
    const auto it = pred_side.joint.find({pred_side.labels[a], gt_labels[b]});
    const std::int64_t inter = it == pred_side.joint.end() ? 0 : it->second;
    const std::int64_t uni = pred_side.sizes[a] + gt_sizes[b] - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
  };

  // enumerate all injections of the smaller side into the larger
  const std::size_t big = std::max(np, ng);
  std::vector<int> perm(big);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double sum = 0.0;
    if (np <= ng) {
      for (std::size_t a = 0; a < np; ++a) sum += iou(a, perm[a]);
    } else {
      for (std::size_t b = 0; b < ng; ++b) sum += iou(perm[b], b);
    }
    best = std::max(best, sum);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

double brute_force_miou(const LabelGrid& pred, const LabelGrid& gt) {
  if (pred.labels.empty()) return 0.0;
  std::vector<int> gt_labels;
  std::vector<std::int64_t> gt_sizes;
  Segments table = segment_table(pred, gt, false, false, gt_labels, gt_sizes);
  const std::size_t divisor = std::max(table.labels.size(), gt_labels.size());
  return best_injection_sum(table, gt_labels, gt_sizes) / static_cast<double>(divisor);
}

double brute_force_jaccard(const LabelGrid& pred, const LabelGrid& gt) {
  if (pred.labels.empty()) return 0.0;
  std::vector<int> gt_labels;
  std::vector<std::int64_t> gt_sizes;
  Segments table = segment_table(pred, gt, true, true, gt_labels, gt_sizes);
  if (gt_labels.empty()) return table.labels.empty() ? 1.0 : 0.0;
  return best_injection_sum(table, gt_labels, gt_sizes) / static_cast<double>(gt_labels.size());
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

LabelGrid reference_postprocess_pass(const LabelGrid& labels, int k, double min_frac,
                                     Connectivity connectivity) {
  const int h = labels.height, w = labels.width;
  UnionFind uf(h * w);
  auto same = [&](int a, int b) { return labels.labels[a] == labels.labels[b]; };

  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const int i = r * w + c;
      if (c > 0 && same(i, i - 1)) uf.unite(i, i - 1);
      if (r > 0 && same(i, i - w)) uf.unite(i, i - w);
      if (connectivity == Connectivity::kEight && r > 0) {
        if (c > 0 && same(i, i - w - 1)) uf.unite(i, i - w - 1);
        if (c + 1 < w && same(i, i - w + 1)) uf.unite(i, i - w + 1);
      }
    }

  struct Info {
    std::int64_t size = 0;
    int label = 0;
    int first = -1;
  };
  std::map<int, Info> components;
  for (int i = 0; i < h * w; ++i) {
    Info& info = components[uf.find(i)];
    ++info.size;
    info.label = labels.labels[i];
    if (info.first < 0) info.first = i;
  }

  std::vector<std::pair<int, Info>> ranked(components.begin(), components.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.size != b.second.size) return a.second.size > b.second.size;
    if (a.second.label != b.second.label) return a.second.label < b.second.label;
    return a.second.first < b.second.first;
  });

  const double min_pixels = min_frac * static_cast<double>(h) * static_cast<double>(w);
  std::map<int, bool> keep;
  for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
    const bool in_budget = rank < static_cast<std::size_t>(k);
    const bool big_enough = static_cast<double>(ranked[rank].second.size) >= min_pixels;
    keep[ranked[rank].first] = in_budget && (rank == 0 || big_enough);
  }

  LabelGrid out = labels;
  const int target = ranked[0].second.label;
  for (int i = 0; i < h * w; ++i)
    if (!keep[uf.find(i)]) out.labels[i] = target;
  return out;
}

}  // namespace

LabelGrid reference_postprocess(const LabelGrid& labels, int k, double min_frac,
                                Connectivity connectivity) {
  LabelGrid current = labels;
  for (int pass = 0; pass < 256; ++pass) {
    LabelGrid next = reference_postprocess_pass(current, k, min_frac, connectivity);
    if (next.labels == current.labels) break;
    current = std::move(next);
  }
  return current;
}

FlowGrid random_flow(Rng& rng, int height, int width, double scale) {
  FlowGrid flow(height, width);
  for (std::size_t i = 0; i < flow.flat_size(); ++i) flow.data()[i] = scale * rng.normal();
  return flow;
}

ScalarGrid random_disparity(Rng& rng, int height, int width, double lo, double hi) {
  ScalarGrid grid(height, width);
  for (std::size_t i = 0; i < grid.size(); ++i) grid.data()[i] = rng.uniform(lo, hi);
  return grid;
}

MaskStack random_logits(Rng& rng, int height, int width, int regions, double scale) {
  MaskStack logits(height, width, regions);
  for (std::size_t i = 0; i < logits.size(); ++i) logits.data()[i] = scale * rng.normal();
  return logits;
}

SoftMaskStack random_soft_masks(Rng& rng, int height, int width, int regions) {
  return flowsub::softmax_masks(random_logits(rng, height, width, regions, 1.0));
}

SoftMaskStack one_hot_masks(const LabelGrid& labels, int regions) {
  SoftMaskStack masks(labels.height, labels.width, regions, 0.0);
  for (int r = 0; r < labels.height; ++r)
    for (int c = 0; c < labels.width; ++c) masks.at(r, c, labels.at(r, c)) = 1.0;
  return masks;
}

LabelGrid random_labels(Rng& rng, int height, int width, int label_count) {
  LabelGrid labels(height, width);
  for (auto& label : labels.labels) label = static_cast<int>(rng.uniform_index(label_count));
  return labels;
}

}  // namespace oracles
