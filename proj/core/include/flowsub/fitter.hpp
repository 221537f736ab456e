#pragma once

#include <cstdint>
#include <vector>

#include "flowsub/camera.hpp"
#include "flowsub/grid.hpp"
#include "flowsub/projector.hpp"

namespace flowsub {

/// First-order recovery of disparity and soft masks from one observed flow
/// field. Defaults were frozen after a small sweep on synthetic scenes.
struct FitConfig {
  int regions = 6;  // K
  int iterations = 2000;
  double lr_disparity = 1e-2;
  double lr_logits = 5e-2;
  double sv_threshold = 1e-5;
  BasisKind basis_kind = BasisKind::kFocalFree8;
  std::uint64_t seed = 0;
  /// Stop when the best loss has not improved by tolerance for patience steps.
  double tolerance = 1e-9;
  int patience = 200;
  double damping = 1e-8;
  double tv_weight = 0.0;  // optional logit smoothing; acceptance runs keep it off
  /// Mask-sharpness pressure (see ObjectiveConfig::sharpness_weight). On by
  /// default: without it the per-pixel parameterization settles into soft
  /// motion mixtures whose argmax is not a segmentation.
  double sharpness_weight = 1e-3;
  double init_disparity = 0.5;
  double init_logit_scale = 0.05;
  // Adam moments
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct FitState {
  ScalarGrid disparity_param;  // pre-softplus
  MaskStack logits;
  int step_count = 0;
  std::vector<double> loss_history;  // pre-step projection loss, one per step
  // Adam accumulators
  ScalarGrid moment1_disparity, moment2_disparity;
  MaskStack moment1_logits, moment2_logits;
};

struct FitResult {
  DisparityField disparity;
  SoftMaskStack masks;
  LabelGrid hard_labels;  // argmax over masks
  double final_loss = 0.0;
  bool converged = false;
  std::vector<double> loss_history;
  int steps = 0;
};

/// Deterministic in config.seed: small random logits break the K-way
/// symmetry, disparity starts uniform at config.init_disparity.
FitState init_state(int height, int width, const FitConfig& config);

/// One adaptive-gradient update. Appends the pre-step projection loss to
/// loss_history. Throws NonFiniteGradient (state unchanged) if the gradient
/// evaluation produces non-finite values.
void step(FitState& state, const FlowGrid& flow, const CameraModel& camera,
          const FitConfig& config);

/// Runs step until the iteration cap or the tolerance window and returns the
/// best-loss iterate encountered (projection rank changes can make the loss
/// non-monotone, so the last iterate is not necessarily the best).
FitResult fit(const FlowGrid& flow, const CameraModel& camera, const FitConfig& config);

}  // namespace flowsub
