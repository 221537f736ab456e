#pragma once

// Independent reference implementations the tests check the library against.
// Everything here recomputes its answer from first principles through a
// different algorithmic route than the code under test.

#include <Eigen/Core>

#include "flowsub/grid.hpp"
#include "flowsub/metrics.hpp"
#include "flowsub/rng.hpp"

namespace oracles {

using flowsub::Connectivity;
using flowsub::FlowGrid;
using flowsub::LabelGrid;
using flowsub::MaskStack;
using flowsub::Rng;
using flowsub::ScalarGrid;
using flowsub::SoftMaskStack;

/// Orthogonal projection of f onto span(S) through the explicit pseudoinverse
/// of S^T S (eigendecomposition, eigenvalues kept when sqrt exceeds
/// sv_threshold): S (S^T S)^+ S^T f.
Eigen::VectorXd pseudoinverse_projection(const Eigen::MatrixXd& s, const Eigen::VectorXd& f,
                                         double sv_threshold);

/// ARI over foreground pixels by O(n^2) pair counting.
double pair_counting_fg_ari(const LabelGrid& pred, const LabelGrid& gt);

/// Optimal-assignment mIoU by exhaustive enumeration of injections
/// (feasible for <= ~7 segments per side).
double brute_force_miou(const LabelGrid& pred, const LabelGrid& gt);

/// Exhaustive counterpart of jaccard_j.
double brute_force_jaccard(const LabelGrid& pred, const LabelGrid& gt);

/// Postprocess reference built on two-pass union-find component labeling.
LabelGrid reference_postprocess(const LabelGrid& labels, int k, double min_frac,
                                Connectivity connectivity);

/// Central difference of a functional with respect to one scalar slot.
template <typename F>
double central_difference(F&& eval, double& slot, double step) {
  const double saved = slot;
  slot = saved + step;
  const double hi = eval();
  slot = saved - step;
  const double lo = eval();
  slot = saved;
  return (hi - lo) / (2.0 * step);
}

// Deterministic random fixtures.
FlowGrid random_flow(Rng& rng, int height, int width, double scale);
ScalarGrid random_disparity(Rng& rng, int height, int width, double lo, double hi);
MaskStack random_logits(Rng& rng, int height, int width, int regions, double scale);
SoftMaskStack random_soft_masks(Rng& rng, int height, int width, int regions);
SoftMaskStack one_hot_masks(const LabelGrid& labels, int regions);
LabelGrid random_labels(Rng& rng, int height, int width, int label_count);

}  // namespace oracles
