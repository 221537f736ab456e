#pragma once

#include <vector>

#include <Eigen/Core>

#include "flowsub/basis.hpp"
#include "flowsub/camera.hpp"
#include "flowsub/grid.hpp"

namespace flowsub {

struct SystemColumn {
  int region = 0;
  int field = 0;
};

/// Region bases flattened into one 2HW x (B*K) matrix. Columns are
/// region-major in fixed field order; rows follow the FlowGrid flattening
/// convention (row-major pixels, u before v per pixel).
struct SystemMatrix {
  int height = 0;
  int width = 0;
  Eigen::MatrixXd columns;
  std::vector<SystemColumn> column_map;
};

SystemMatrix assemble_system(const RegionBases& regions);

struct ProjectionResult {
  FlowGrid projected;           // orthogonal projection of the flow onto span(S)
  Eigen::VectorXd coefficients; // least-squares solution over retained directions
  int rank = 0;                 // retained singular directions
  double residual = 0.0;        // || flow - projected ||_2 over all 2HW entries
};

/// Projects a flow onto the column space of the system via SVD, keeping left
/// singular vectors whose singular value exceeds sv_threshold.
ProjectionResult project_flow(const SystemMatrix& system, const FlowGrid& flow,
                              double sv_threshold = 1e-5);

/// Euclidean norm of the difference, both fields flattened to one vector.
double reconstruction_loss(const FlowGrid& observed, const FlowGrid& projected);

/// Companion scale-comparable form of the loss for logging: RMS per entry.
double per_entry_rms(double loss, int height, int width);

/// d = softplus(p) applied entry-wise; keeps disparity nonnegative without
/// constraining the optimized parameter.
ScalarGrid disparity_from_param(const ScalarGrid& param);

/// Channel-wise softmax per pixel.
SoftMaskStack softmax_masks(const MaskStack& logits);

/// Forward/backward configuration for the differentiable reconstruction
/// objective. The objective composes: basis build -> normalize -> restrict by
/// softmax(logits) -> assemble -> damped least-squares projection -> loss,
/// with disparity parameterized as softplus(param).
struct ObjectiveConfig {
  BasisKind basis_kind = BasisKind::kFocalFree8;
  double sv_threshold = 1e-5;  // used for the reported projection residual
  double damping = 1e-8;       // Tikhonov term on the normal equations
  double tv_weight = 0.0;      // optional smoothing penalty on logits (off by default)
  /// Weight of the mask-entropy pressure pushing per-pixel assignments toward
  /// one-hot. At any pixel a soft mixture of several wrong channel motions
  /// can reproduce the flow exactly, so the reconstruction loss alone has
  /// large families of non-segmenting minima; this term removes them while
  /// keeping hard segmentations (which already reconstruct) optimal.
  double sharpness_weight = 0.0;
};

struct ObjectiveEval {
  /// Damped least-squares reconstruction loss (the function the gradients
  /// differentiate), plus the smoothing penalty when enabled.
  double total_loss = 0.0;
  double damped_loss = 0.0;
  /// Residual of the thresholded-SVD projection route, as project_flow
  /// reports it. Agrees with damped_loss up to the damping scale.
  double projection_residual = 0.0;
  int rank = 0;
  ScalarGrid grad_disparity_param;
  MaskStack grad_logits;
};

/// Exact gradient of the reconstruction objective with respect to the
/// disparity parameters and the mask logits. The projector is differentiated
/// through the damped normal equations c* = (S^T S + damping I)^-1 S^T f
/// rather than through the SVD factors, which stay stable when S is close to
/// rank-deficient.
ObjectiveEval loss_gradient(const CameraModel& camera, const ScalarGrid& disparity_param,
                            const MaskStack& mask_logits, const FlowGrid& flow,
                            const ObjectiveConfig& config);

/// Forward-only evaluation of the same objective (total loss).
double reconstruction_objective(const CameraModel& camera, const ScalarGrid& disparity_param,
                                const MaskStack& mask_logits, const FlowGrid& flow,
                                const ObjectiveConfig& config);

}  // namespace flowsub
