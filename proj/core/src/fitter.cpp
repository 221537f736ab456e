#include "flowsub/fitter.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "flowsub/rng.hpp"

namespace flowsub {

namespace {

/// Inverse of softplus: the parameter whose softplus is d.
double softplus_inverse(double d) { return std::log(std::expm1(d)); }

ObjectiveConfig objective_config(const FitConfig& config) {
  ObjectiveConfig cfg;
  cfg.basis_kind = config.basis_kind;
  cfg.sv_threshold = config.sv_threshold;
  cfg.damping = config.damping;
  cfg.tv_weight = config.tv_weight;
  cfg.sharpness_weight = config.sharpness_weight;
  return cfg;
}

void adam_update(double* param, double* m1, double* m2, const double* grad, std::size_t n,
                 double lr, const FitConfig& config, int t) {
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    m1[i] = config.beta1 * m1[i] + (1.0 - config.beta1) * grad[i];
    m2[i] = config.beta2 * m2[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double m1_hat = m1[i] / correction1;
    const double m2_hat = m2[i] / correction2;
    param[i] -= lr * m1_hat / (std::sqrt(m2_hat) + config.adam_eps);
  }
}

}  // namespace

FitState init_state(int height, int width, const FitConfig& config) {
  if (height < 4 || width < 4) throw Error(ErrorCode::kParamOutOfRange, "need dims >= 4x4");
  if (config.regions < 1) throw Error(ErrorCode::kParamOutOfRange, "need K >= 1");
  if (!(config.lr_disparity > 0.0 && config.lr_logits > 0.0))
    throw Error(ErrorCode::kParamOutOfRange, "learning rates must be > 0");
  if (!(config.init_disparity > 0.0))
    throw Error(ErrorCode::kParamOutOfRange, "init_disparity must be > 0");

  Rng rng(config.seed);
  FitState state;
  state.disparity_param = ScalarGrid(height, width, softplus_inverse(config.init_disparity));
  state.logits = MaskStack(height, width, config.regions);
  for (std::size_t i = 0; i < state.logits.size(); ++i)
    state.logits.data()[i] = config.init_logit_scale * rng.normal();
  state.moment1_disparity = ScalarGrid(height, width, 0.0);
  state.moment2_disparity = ScalarGrid(height, width, 0.0);
  state.moment1_logits = MaskStack(height, width, config.regions, 0.0);
  state.moment2_logits = MaskStack(height, width, config.regions, 0.0);
  return state;
}

void step(FitState& state, const FlowGrid& flow, const CameraModel& camera,
          const FitConfig& config) {
  if (state.disparity_param.height() != flow.height() ||
      state.disparity_param.width() != flow.width())
    throw Error(ErrorCode::kDimensionMismatch, "state does not match flow dims");

  ObjectiveEval eval =
      loss_gradient(camera, state.disparity_param, state.logits, flow, objective_config(config));
  if (!eval.grad_disparity_param.vec().allFinite() || !eval.grad_logits.vec().allFinite() ||
      !std::isfinite(eval.total_loss))
    throw Error(ErrorCode::kNonFiniteGradient, "gradient evaluation produced non-finite values");

  state.loss_history.push_back(eval.projection_residual);
  ++state.step_count;

  adam_update(state.disparity_param.data(), state.moment1_disparity.data(),
              state.moment2_disparity.data(), eval.grad_disparity_param.data(),
              state.disparity_param.size(), config.lr_disparity, config, state.step_count);
  adam_update(state.logits.data(), state.moment1_logits.data(), state.moment2_logits.data(),
              eval.grad_logits.data(), state.logits.size(), config.lr_logits, config,
              state.step_count);
}

namespace {

/// Projection loss of the thresholded-SVD route at the given parameters.
double projection_loss_at(const CameraModel& camera, const ScalarGrid& disparity_param,
                          const MaskStack& logits, const FlowGrid& flow,
                          const FitConfig& config) {
  const DisparityField disparity = disparity_from_param(disparity_param);
  const SoftMaskStack masks = softmax_masks(logits);
  const BasisStack basis = normalized_basis_for(camera, disparity, config.basis_kind);
  const SystemMatrix system = assemble_system(restrict_basis(basis, masks));
  return project_flow(system, flow, config.sv_threshold).residual;
}

}  // namespace

FitResult fit(const FlowGrid& flow, const CameraModel& camera, const FitConfig& config) {
  FitState state = init_state(flow.height(), flow.width(), config);

  ScalarGrid best_param = state.disparity_param;
  MaskStack best_logits = state.logits;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_step = 0;
  bool converged = false;

  for (int it = 0; it < config.iterations; ++it) {
    // the loss step() appends belongs to the parameters before the update
    ScalarGrid pre_param = state.disparity_param;
    MaskStack pre_logits = state.logits;
    step(state, flow, camera, config);
    const double loss = state.loss_history.back();
    if (loss < best_loss) {
      if (loss < best_loss - config.tolerance) best_step = state.step_count;
      best_loss = loss;
      best_param = std::move(pre_param);
      best_logits = std::move(pre_logits);
    }
    if (state.step_count - best_step >= config.patience) {
      converged = true;
      break;
    }
  }

  // The last update's parameters never made it into loss_history; give them a
  // chance to be the returned iterate.
  const double last_loss = projection_loss_at(camera, state.disparity_param, state.logits, flow, config);
  if (last_loss < best_loss) {
    best_loss = last_loss;
    best_param = state.disparity_param;
    best_logits = state.logits;
  }

  FitResult result;
  result.steps = state.step_count;
  result.converged = converged;
  result.loss_history = state.loss_history;
  result.disparity = disparity_from_param(best_param);
  result.masks = softmax_masks(best_logits);
  result.final_loss = best_loss;

  result.hard_labels = LabelGrid(flow.height(), flow.width());
  for (int r = 0; r < flow.height(); ++r)
    for (int c = 0; c < flow.width(); ++c) {
      int arg = 0;
      for (int k = 1; k < config.regions; ++k)
        if (result.masks.at(r, c, k) > result.masks.at(r, c, arg)) arg = k;
      result.hard_labels.at(r, c) = arg;
    }
  return result;
}

}  // namespace flowsub
