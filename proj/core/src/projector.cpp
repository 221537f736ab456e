#include "flowsub/projector.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

namespace flowsub {

SystemMatrix assemble_system(const RegionBases& regions) {
  if (regions.per_region.empty()) throw Error(ErrorCode::kEmptyRegions, "no regions to assemble");

  const BasisStack& first = regions.per_region.front();
  const int h = first.height, w = first.width;
  const int fields = first.field_count();
  for (const BasisStack& stack : regions.per_region) {
    if (stack.height != h || stack.width != w || stack.field_count() != fields)
      throw Error(ErrorCode::kDimensionMismatch, "region stacks disagree in shape");
  }

  SystemMatrix system;
  system.height = h;
  system.width = w;
  const Eigen::Index rows = 2 * static_cast<Eigen::Index>(h) * w;
  system.columns.resize(rows, static_cast<Eigen::Index>(regions.per_region.size()) * fields);
  system.column_map.reserve(system.columns.cols());

  Eigen::Index col = 0;
  for (int i = 0; i < regions.region_count(); ++i) {
    for (int j = 0; j < fields; ++j, ++col) {
      system.columns.col(col) = regions.per_region[i].fields[j].vec();
      system.column_map.push_back({i, j});
    }
  }
  return system;
}

ProjectionResult project_flow(const SystemMatrix& system, const FlowGrid& flow,
                              double sv_threshold) {
  if (flow.height() != system.height || flow.width() != system.width)
    throw Error(ErrorCode::kDimensionMismatch, "flow does not match system dims");
  if (!(sv_threshold > 0.0)) throw Error(ErrorCode::kParamOutOfRange, "sv_threshold must be > 0");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(system.columns, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const Eigen::Index n = sigma.size();

  int rank = 0;
  while (rank < n && sigma(rank) > sv_threshold) ++rank;

  Eigen::Map<const Eigen::VectorXd> f = flow.vec();
  ProjectionResult result;
  result.rank = rank;
  result.projected = FlowGrid(system.height, system.width);
  result.coefficients = Eigen::VectorXd::Zero(system.columns.cols());

  if (rank > 0) {
    const auto retained_u = svd.matrixU().leftCols(rank);
    Eigen::VectorXd ut_f = retained_u.transpose() * f;
    result.projected.vec() = retained_u * ut_f;
    result.coefficients =
        svd.matrixV().leftCols(rank) * sigma.head(rank).cwiseInverse().asDiagonal() * ut_f;
  }
  result.residual = (f - result.projected.vec()).norm();
  return result;
}

double reconstruction_loss(const FlowGrid& observed, const FlowGrid& projected) {
  if (!observed.same_shape(projected))
    throw Error(ErrorCode::kDimensionMismatch, "flow fields disagree in shape");
  return (observed.vec() - projected.vec()).norm();
}

double per_entry_rms(double loss, int height, int width) {
  return loss / std::sqrt(2.0 * height * width);
}

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

constexpr double kSmoothingEps = 1e-3;  // Charbonnier knee of the logit penalty

void require_finite(const Eigen::Map<const Eigen::VectorXd>& values, const char* what) {
  if (!values.allFinite()) throw Error(ErrorCode::kNonFiniteInput, std::string(what) + " has non-finite entries");
}

/// Everything the backward pass reuses from the forward computation.
struct ChainState {
  ScalarGrid disparity;
  SoftMaskStack masks;
  BasisStack normalized;
  SystemMatrix system;
  Eigen::VectorXd coefficients;  // damped least-squares solution
  Eigen::VectorXd residual_vec;  // f - S c*
  Eigen::VectorXd damping_diag;  // D of the damped normal equations
  Eigen::LDLT<Eigen::MatrixXd> normal_solver;  // factorization of S^T S + D
  double damped_loss = 0.0;
  double projection_residual = 0.0;
  int rank = 0;
};

ChainState evaluate_chain(const CameraModel& camera, const ScalarGrid& disparity_param,
                          const MaskStack& mask_logits, const FlowGrid& flow,
                          const ObjectiveConfig& config) {
  camera.require_dims(disparity_param.height(), disparity_param.width());
  camera.require_dims(mask_logits.height(), mask_logits.width());
  camera.require_dims(flow.height(), flow.width());
  require_finite(disparity_param.vec(), "disparity parameter");
  require_finite(mask_logits.vec(), "mask logits");
  require_finite(flow.vec(), "flow");

  ChainState state;
  state.disparity = disparity_from_param(disparity_param);
  state.masks = softmax_masks(mask_logits);
  state.normalized = normalized_basis_for(camera, state.disparity, config.basis_kind);
  state.system = assemble_system(restrict_basis(state.normalized, state.masks));

  Eigen::BDCSVD<Eigen::MatrixXd> svd(state.system.columns,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  Eigen::Map<const Eigen::VectorXd> f = flow.vec();
  Eigen::VectorXd ut_f = svd.matrixU().transpose() * f;

  // Damped normal equations c* = (S^T S + D)^-1 S^T f. D is Tikhonov weighted
  // by inverse region mask mass: among near-parallel columns of duplicated
  // regions it selects, inside the near-null space and at no loss cost, the
  // solution concentrated on the better-supported region, so starved
  // duplicates decay instead of freezing into soft ties. D is treated as
  // constant in the backward pass (its variation enters at the damping scale).
  const int kk = state.masks.regions();
  const int fields_per_region = state.normalized.field_count();
  Eigen::VectorXd region_mass(kk);
  for (int i = 0; i < kk; ++i) {
    double sum = 0.0;
    for (int r = 0; r < state.masks.height(); ++r)
      for (int c = 0; c < state.masks.width(); ++c) sum += state.masks.at(r, c, i) * state.masks.at(r, c, i);
    region_mass(i) = sum;
  }
  const double mean_mass = std::max(region_mass.mean(), 1e-12);
  state.damping_diag.resize(state.system.columns.cols());
  for (Eigen::Index j = 0; j < state.damping_diag.size(); ++j) {
    const int region = static_cast<int>(j) / fields_per_region;
    const double relative = std::max(region_mass(region) / mean_mass, 1e-6);
    state.damping_diag(j) = config.damping / relative;
  }

  Eigen::MatrixXd normal_matrix =
      svd.matrixV() * sigma.array().square().matrix().asDiagonal() * svd.matrixV().transpose();
  normal_matrix.diagonal() += state.damping_diag;
  state.normal_solver.compute(normal_matrix);
  state.coefficients = state.normal_solver.solve(svd.matrixV() * sigma.cwiseProduct(ut_f));
  state.residual_vec = f - state.system.columns * state.coefficients;
  state.damped_loss = state.residual_vec.norm();

  int rank = 0;
  while (rank < sigma.size() && sigma(rank) > config.sv_threshold) ++rank;
  state.rank = rank;
  state.projection_residual =
      (f - svd.matrixU().leftCols(rank) * ut_f.head(rank)).norm();
  return state;
}

/// sharpness_weight * sum_q H(m(q)) with H the Shannon entropy of the
/// per-pixel assignment; gradient with respect to the logits is
/// -w * m_k (log m_k + H(m)).
double mask_entropy_penalty(const SoftMaskStack& masks, MaskStack* grad, double weight) {
  if (weight == 0.0) return 0.0;
  double total = 0.0;
  const int kk = masks.regions();
  for (int r = 0; r < masks.height(); ++r)
    for (int c = 0; c < masks.width(); ++c) {
      double entropy = 0.0;
      for (int k = 0; k < kk; ++k) {
        const double m = masks.at(r, c, k);
        if (m > 0.0) entropy -= m * std::log(m);
      }
      total += entropy;
      if (grad) {
        for (int k = 0; k < kk; ++k) {
          const double m = masks.at(r, c, k);
          if (m > 0.0) grad->at(r, c, k) += -weight * m * (std::log(m) + entropy);
        }
      }
    }
  return weight * total;
}

double logit_smoothing_penalty(const MaskStack& logits, MaskStack* grad, double weight) {
  if (weight == 0.0) return 0.0;
  double total = 0.0;
  const int h = logits.height(), w = logits.width(), kk = logits.regions();
  auto accumulate = [&](int r0, int c0, int r1, int c1) {
    for (int k = 0; k < kk; ++k) {
      const double diff = logits.at(r0, c0, k) - logits.at(r1, c1, k);
      total += std::sqrt(diff * diff + kSmoothingEps * kSmoothingEps) - kSmoothingEps;
      if (grad) {
        const double slope = weight * diff / std::sqrt(diff * diff + kSmoothingEps * kSmoothingEps);
        grad->at(r0, c0, k) += slope;
        grad->at(r1, c1, k) -= slope;
      }
    }
  };
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (c + 1 < w) accumulate(r, c, r, c + 1);
      if (r + 1 < h) accumulate(r, c, r + 1, c);
    }
  return weight * total;
}

}  // namespace

ScalarGrid disparity_from_param(const ScalarGrid& param) {
  ScalarGrid out(param.height(), param.width());
  for (std::size_t i = 0; i < param.size(); ++i) out.data()[i] = softplus(param.data()[i]);
  return out;
}

SoftMaskStack softmax_masks(const MaskStack& logits) {
  SoftMaskStack masks(logits.height(), logits.width(), logits.regions());
  const int kk = logits.regions();
  for (int r = 0; r < logits.height(); ++r)
    for (int c = 0; c < logits.width(); ++c) {
      double peak = logits.at(r, c, 0);
      for (int k = 1; k < kk; ++k) peak = std::max(peak, logits.at(r, c, k));
      double sum = 0.0;
      for (int k = 0; k < kk; ++k) {
        const double e = std::exp(logits.at(r, c, k) - peak);
        masks.at(r, c, k) = e;
        sum += e;
      }
      for (int k = 0; k < kk; ++k) masks.at(r, c, k) /= sum;
    }
  return masks;
}

double reconstruction_objective(const CameraModel& camera, const ScalarGrid& disparity_param,
                                const MaskStack& mask_logits, const FlowGrid& flow,
                                const ObjectiveConfig& config) {
  ChainState state = evaluate_chain(camera, disparity_param, mask_logits, flow, config);
  return state.damped_loss + logit_smoothing_penalty(mask_logits, nullptr, config.tv_weight) +
         mask_entropy_penalty(state.masks, nullptr, config.sharpness_weight);
}

ObjectiveEval loss_gradient(const CameraModel& camera, const ScalarGrid& disparity_param,
                            const MaskStack& mask_logits, const FlowGrid& flow,
                            const ObjectiveConfig& config) {
  ChainState state = evaluate_chain(camera, disparity_param, mask_logits, flow, config);

  const int h = flow.height(), w = flow.width();
  const int kk = mask_logits.regions();
  const int fields = state.normalized.field_count();
  const int n_trans = state.normalized.translation_count();

  ObjectiveEval eval;
  eval.damped_loss = state.damped_loss;
  eval.projection_residual = state.projection_residual;
  eval.rank = state.rank;
  eval.grad_disparity_param = ScalarGrid(h, w);
  eval.grad_logits = MaskStack(h, w, kk);

  if (state.damped_loss > 0.0) {
    // dL/dS = M with L = ||f - S c*||, c* = (S^T S + D)^-1 S^T f:
    //   M = (1/L) [ (S w) c*^T - r (c* + w)^T ],  w = (S^T S + D)^-1 S^T r.
    // S^T r equals D c* exactly, so w reuses the cached factorization.
    const Eigen::MatrixXd& s = state.system.columns;
    const Eigen::VectorXd& c_star = state.coefficients;
    const Eigen::VectorXd& r_vec = state.residual_vec;

    Eigen::VectorXd w_vec =
        state.normal_solver.solve(state.damping_diag.cwiseProduct(c_star));
    Eigen::VectorXd s_w = s * w_vec;

    Eigen::MatrixXd sensitivity =
        (s_w * c_star.transpose() - r_vec * (c_star + w_vec).transpose()) / state.damped_loss;

    // Contract dS/dtheta against the sensitivity; every parameter touches only
    // its own pixel's two rows.
    std::vector<double> h_region(kk);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const Eigen::Index row_u = 2 * (static_cast<Eigen::Index>(r) * w + c);
        const Eigen::Index row_v = row_u + 1;

        double disp_accum = 0.0;
        for (int i = 0; i < kk; ++i) {
          const double m = state.masks.at(r, c, i);
          double h_i = 0.0;
          for (int j = 0; j < fields; ++j) {
            const Eigen::Index col = static_cast<Eigen::Index>(i) * fields + j;
            const double su = sensitivity(row_u, col);
            const double sv = sensitivity(row_v, col);
            h_i += su * state.normalized.fields[j].at(r, c, 0) +
                   sv * state.normalized.fields[j].at(r, c, 1);
            if (j < n_trans) {
              disp_accum += m * (su * state.normalized.templates[j].at(r, c, 0) +
                                 sv * state.normalized.templates[j].at(r, c, 1));
            }
          }
          h_region[i] = h_i;
        }

        double mean_h = 0.0;
        for (int i = 0; i < kk; ++i) mean_h += state.masks.at(r, c, i) * h_region[i];
        for (int k = 0; k < kk; ++k) {
          const double m = state.masks.at(r, c, k);
          eval.grad_logits.at(r, c, k) = m * (h_region[k] - mean_h);
        }
        eval.grad_disparity_param.at(r, c) = sigmoid(disparity_param.at(r, c)) * disp_accum;
      }
  }

  eval.total_loss =
      state.damped_loss + logit_smoothing_penalty(mask_logits, &eval.grad_logits, config.tv_weight) +
      mask_entropy_penalty(state.masks, &eval.grad_logits, config.sharpness_weight);
  return eval;
}

}  // namespace flowsub
