// Acceptance suite: one pass/fail line per criterion, exit 1 on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "flowsub/fitter.hpp"
#include "flowsub/io/flo.hpp"
#include "flowsub/io/flow_color.hpp"
#include "flowsub/io/pfm.hpp"
#include "flowsub/metrics.hpp"
#include "flowsub/projector.hpp"
#include "flowsub/scene.hpp"
#include "support/oracles.hpp"

using namespace flowsub;

namespace {

int failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %d. %s%s%s\n", pass ? "PASS" : "FAIL", index, name,
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct RandomInstance {
  CameraModel camera;
  DisparityField disparity;
  SoftMaskStack masks;
  SystemMatrix system;
};

RandomInstance make_instance(Rng& rng, int size, int regions) {
  RandomInstance inst{CameraModel::centered(size, size, Focal{1.0, 1.0}),
                      oracles::random_disparity(rng, size, size, 0.1, 1.0),
                      oracles::random_soft_masks(rng, size, size, regions),
                      {}};
  BasisStack basis = normalize_basis(focal_free_basis(inst.camera, inst.disparity), inst.disparity);
  inst.system = assemble_system(restrict_basis(basis, inst.masks));
  return inst;
}

// 1. ground-truth flow lies in the span of its own restricted basis
void criterion_oracle_closure() {
  bool pass = true;
  double worst = 0.0, slowest = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto start = std::chrono::steady_clock::now();
    RandomSceneParams params;
    params.regions = 1 + static_cast<int>(seed % 4);
    params.width = params.height = 64;
    SceneSpec spec = random_scene(seed, params);
    SceneInstance instance = compose_scene(spec);

    BasisStack basis =
        normalized_basis_for(spec.camera, instance.gt_disparity, BasisKind::kFocalFree8);
    SoftMaskStack masks = oracles::one_hot_masks(instance.gt_labels, params.regions);
    ProjectionResult projection =
        project_flow(assemble_system(restrict_basis(basis, masks)), instance.flow);
    const double relative = projection.residual / instance.flow.vec().norm();
    const double elapsed = seconds_since(start);
    worst = std::max(worst, relative);
    slowest = std::max(slowest, elapsed);
    if (!(relative < 1e-6)) pass = false;
    if (elapsed >= 1.0) pass = false;
  }
  char buffer[128];
  std::snprintf(buffer, sizeof(buffer), "worst relative residual %.3g, slowest scene %.2fs",
                worst, slowest);
  report(1, "oracle closure (20 scenes, 64x64, K in 1..4)", pass, buffer);
}

// 2. intrinsic six-field span is inside the focal-free eight-field span
void criterion_span_containment() {
  Rng rng(202);
  bool pass = true;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int size = 16;
    const double f = rng.uniform(0.5, 2.0) * size;
    CameraModel camera = CameraModel::centered(size, size, Focal{f, f});
    DisparityField disparity = oracles::random_disparity(rng, size, size, 0.05, 1.0);

    BasisStack six = normalize_basis(intrinsic_basis(camera, disparity), disparity);
    BasisStack eight = normalize_basis(focal_free_basis(camera, disparity), disparity);
    SoftMaskStack full(size, size, 1, 1.0);
    SystemMatrix system = assemble_system(restrict_basis(eight, full));

    std::vector<FlowGrid> candidates;
    for (int j = 0; j < 6; ++j) candidates.push_back(six.fields[j]);
    for (int extra = 0; extra < 4; ++extra) {
      FlowGrid combo(size, size);
      for (int j = 0; j < 6; ++j) combo.vec() += rng.uniform(-2.0, 2.0) * six.fields[j].vec();
      candidates.push_back(combo);
    }
    for (const FlowGrid& candidate : candidates) {
      const double norm = candidate.vec().norm();
      if (norm == 0.0) continue;
      const double relative = project_flow(system, candidate).residual / norm;
      worst = std::max(worst, relative);
      if (!(relative < 1e-8)) pass = false;
    }
  }
  char buffer[96];
  std::snprintf(buffer, sizeof(buffer), "worst relative residual %.3g", worst);
  report(2, "span containment of the intrinsic basis (fx == fy)", pass, buffer);
}

// 3. projection algebra on random instances
void criterion_projection_algebra() {
  Rng rng(303);
  bool pass = true;
  double worst_idem = 0, worst_lin = 0, worst_orth = 0, worst_oracle = 0;
  for (int trial = 0; trial < 20; ++trial) {
    RandomInstance inst = make_instance(rng, 8, 2);
    FlowGrid a = oracles::random_flow(rng, 8, 8, 1.0);
    FlowGrid b = oracles::random_flow(rng, 8, 8, 1.0);

    ProjectionResult pa = project_flow(inst.system, a);
    ProjectionResult again = project_flow(inst.system, pa.projected);
    const double denom_idem = std::max(pa.projected.vec().norm(), 1e-300);
    worst_idem =
        std::max(worst_idem, (again.projected.vec() - pa.projected.vec()).norm() / denom_idem);

    ProjectionResult pb = project_flow(inst.system, b);
    FlowGrid combo(8, 8);
    const double alpha = rng.uniform(-2.0, 2.0), beta = rng.uniform(-2.0, 2.0);
    combo.vec() = alpha * a.vec() + beta * b.vec();
    Eigen::VectorXd expected = alpha * pa.projected.vec() + beta * pb.projected.vec();
    worst_lin = std::max(worst_lin,
                         (project_flow(inst.system, combo).projected.vec() - expected).norm() /
                             std::max(expected.norm(), 1e-300));

    Eigen::VectorXd residual = a.vec() - pa.projected.vec();
    for (int col = 0; col < inst.system.columns.cols(); ++col) {
      const double column_norm = inst.system.columns.col(col).norm();
      if (column_norm == 0.0) continue;
      worst_orth = std::max(worst_orth, std::abs(residual.dot(inst.system.columns.col(col))) /
                                            (a.vec().norm() * column_norm));
    }

    Eigen::VectorXd oracle = oracles::pseudoinverse_projection(inst.system.columns, a.vec(), 1e-5);
    worst_oracle = std::max(worst_oracle, (pa.projected.vec() - oracle).norm() / a.vec().norm());
  }
  pass = worst_idem < 1e-10 && worst_lin < 1e-9 && worst_orth < 1e-8 && worst_oracle < 1e-8;
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer),
                "idempotence %.2g, linearity %.2g, orthogonality %.2g, oracle %.2g", worst_idem,
                worst_lin, worst_orth, worst_oracle);
  report(3, "projection algebra (20 instances, 8x8, K=2)", pass, buffer);
}

// 4. analytic gradients match central finite differences
void criterion_gradient_correctness() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(404);
  bool pass = true;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int size = 16, regions = 2;
    CameraModel camera = CameraModel::centered(size, size);
    ScalarGrid param(size, size);
    for (std::size_t i = 0; i < param.size(); ++i) param.data()[i] = rng.uniform(-1.0, 0.5);
    MaskStack logits = oracles::random_logits(rng, size, size, regions, 0.5);
    FlowGrid flow = oracles::random_flow(rng, size, size, 1.0);

    ObjectiveConfig config;
    ObjectiveEval eval = loss_gradient(camera, param, logits, flow, config);
    auto objective = [&] { return reconstruction_objective(camera, param, logits, flow, config); };

    const double step = 1e-4;
    auto check = [&](double fd, double analytic) {
      if (std::abs(fd) < 1e-8) {
        worst = std::max(worst, std::abs(fd - analytic));
        if (!(std::abs(fd - analytic) < 1e-8)) pass = false;
      } else {
        const double relative = std::abs(fd - analytic) / std::abs(fd);
        worst = std::max(worst, relative);
        if (!(relative < 1e-4)) pass = false;
      }
    };
    for (std::size_t i = 0; i < param.size(); ++i)
      check(oracles::central_difference(objective, param.data()[i], step),
            eval.grad_disparity_param.data()[i]);
    for (std::size_t i = 0; i < logits.size(); ++i)
      check(oracles::central_difference(objective, logits.data()[i], step),
            eval.grad_logits.data()[i]);
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 120.0) pass = false;
  char buffer[96];
  std::snprintf(buffer, sizeof(buffer), "worst deviation %.3g, %.1fs total", worst, elapsed);
  report(4, "gradient correctness vs finite differences (5 instances, 16x16, K=2)", pass, buffer);
}

// scene family for the recovery criteria: random scenes with a healthy
// identifiability margin
RandomSceneParams recovery_params(int regions) {
  RandomSceneParams params;
  params.regions = regions;
  params.width = params.height = 64;
  params.min_motion_gap = 1.0;
  return params;
}

// 5. fit recovers a K_true=3 segmentation with K=6
void criterion_recovery() {
  bool pass = true;
  int successes = 0;
  double slowest = 0.0;
  std::string scores;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto start = std::chrono::steady_clock::now();
    SceneSpec spec = random_scene(seed, recovery_params(3));
    SceneInstance instance = compose_scene(spec);

    FitConfig config;  // defaults: K = 6
    config.seed = seed;
    FitResult result = fit(instance.flow, spec.camera, config);
    const double score = fg_ari(result.hard_labels, instance.gt_labels);
    const double elapsed = seconds_since(start);
    slowest = std::max(slowest, elapsed);
    if (elapsed >= 300.0) pass = false;
    successes += score >= 0.90;
    char one[32];
    std::snprintf(one, sizeof(one), "%s%.2f", scores.empty() ? "" : " ", score);
    scores += one;
  }
  if (successes < 8) pass = false;
  char buffer[224];
  std::snprintf(buffer, sizeof(buffer), "%d/10 seeds at FG-ARI >= 0.90 [%s], slowest %.0fs",
                successes, scores.c_str(), slowest);
  report(5, "segmentation recovery (fit, K=6 on K_true=3)", pass, buffer);
}

// 6. ablation direction: rotation-only suffices without depth; full dominates
void criterion_ablation() {
  bool pass = true;

  double worst_rel = 0.0;
  bool disparity_untouched = true;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    RandomSceneParams params = recovery_params(1);
    params.motion_style = MotionStyle::kPureRotation;
    SceneSpec spec = random_scene(seed, params);
    SceneInstance instance = compose_scene(spec);

    FitConfig config;
    config.basis_kind = BasisKind::kRotationOnly;
    config.iterations = 200;
    config.seed = seed;
    FitResult result = fit(instance.flow, spec.camera, config);
    worst_rel = std::max(worst_rel, result.final_loss);
    if (!(result.final_loss < 1e-6)) pass = false;
    for (std::size_t i = 0; i < result.disparity.size(); ++i)
      disparity_untouched &= result.disparity.data()[i] == result.disparity.data()[0];
  }
  if (!disparity_untouched) pass = false;

  int full_wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SceneSpec spec = random_scene(seed + 100, recovery_params(3));
    SceneInstance instance = compose_scene(spec);
    auto loss_for = [&](BasisKind kind) {
      FitConfig config;
      config.basis_kind = kind;
      config.seed = seed;
      config.iterations = 600;
      return fit(instance.flow, spec.camera, config).final_loss;
    };
    const double full = loss_for(BasisKind::kFocalFree8);
    const double only_t = loss_for(BasisKind::kTranslationOnly);
    const double only_r = loss_for(BasisKind::kRotationOnly);
    full_wins += (full <= only_t && full <= only_r);
  }
  if (full_wins < 8) pass = false;
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer),
                "rotation-only worst loss %.3g, disparity untouched %s, full wins %d/10",
                worst_rel, disparity_untouched ? "yes" : "no", full_wins);
  report(6, "ablation direction (only-R suffices; full dominates)", pass, buffer);
}

// 7. metric oracles
void criterion_metric_oracles() {
  Rng rng(707);
  bool pass = true;
  double worst_miou = 0.0, worst_ari = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    LabelGrid pred = oracles::random_labels(rng, 8, 8, 1 + trial % 6);
    LabelGrid gt = oracles::random_labels(rng, 8, 8, 1 + (trial + 2) % 6);
    const double diff = std::abs(hungarian_miou(pred, gt) - oracles::brute_force_miou(pred, gt));
    worst_miou = std::max(worst_miou, diff);
    if (!(diff <= 1e-12)) pass = false;
  }
  for (int trial = 0; trial < 20; ++trial) {
    LabelGrid pred = oracles::random_labels(rng, 6, 6, 3);
    LabelGrid gt = oracles::random_labels(rng, 6, 6, 3);
    gt.background_label = 0;
    const double diff = std::abs(fg_ari(pred, gt) - oracles::pair_counting_fg_ari(pred, gt));
    worst_ari = std::max(worst_ari, diff);
    if (!(diff <= 1e-12)) pass = false;
  }
  {
    LabelGrid gt(1, 4, 0, 0);
    gt.labels = {1, 1, 1, 2};
    LabelGrid pred(1, 4, 0, 0);
    pred.labels = {0, 0, 1, 1};
    if (fg_ari(pred, gt) != 0.0) pass = false;
  }
  bool scale_exact = true;
  {
    Rng rng2(708);
    ScalarGrid gt(6, 6), pred(6, 6);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      gt.data()[i] = rng2.uniform(0.5, 9.5);
      pred.data()[i] = rng2.uniform(0.5, 9.5);
    }
    DepthEvalOptions options;
    options.pred_encoding = DepthEncoding::kDepth;
    options.median_scale = true;
    DepthReport base = depth_metrics(pred, gt, options);
    for (double gamma : {0.5, 2.0}) {
      ScalarGrid scaled(6, 6);
      for (std::size_t i = 0; i < pred.size(); ++i) scaled.data()[i] = gamma * pred.data()[i];
      DepthReport rescaled = depth_metrics(scaled, gt, options);
      scale_exact &= base.abs_rel == rescaled.abs_rel && base.sq_rel == rescaled.sq_rel &&
                     base.rmse == rescaled.rmse && base.rmse_log == rescaled.rmse_log &&
                     base.log10 == rescaled.log10 && base.delta1 == rescaled.delta1 &&
                     base.delta2 == rescaled.delta2 && base.delta3 == rescaled.delta3;
    }
  }
  if (!scale_exact) pass = false;
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer),
                "miou worst |diff| %.3g, fg-ari worst |diff| %.3g, median-scale exact %s",
                worst_miou, worst_ari, scale_exact ? "yes" : "no");
  report(7, "metric oracles (assignment brute force, pair counting, scale invariance)", pass,
         buffer);
}

// 8. post-processing
void criterion_postprocess() {
  Rng rng(808);
  bool pass = true;
  for (int trial = 0; trial < 50; ++trial) {
    LabelGrid grid = oracles::random_labels(rng, 12, 12, 1 + trial % 4);
    const int k = 1 + static_cast<int>(rng.uniform_index(6));
    const double min_frac = trial % 2 == 0 ? 0.01 : 0.04;
    LabelGrid once = postprocess_masks(grid, k, min_frac);
    if (postprocess_masks(once, k, min_frac).labels != once.labels) pass = false;
    if (oracles::reference_postprocess(grid, k, min_frac, Connectivity::kFour).labels !=
        once.labels)
      pass = false;
  }
  {
    LabelGrid grid(128, 128, 0);
    for (int r = 10; r < 14; ++r)
      for (int c = 10; c < 14; ++c) grid.at(r, c) = 1;  // 16 px < 16.384
    LabelGrid merged = postprocess_masks(grid, 6, 0.001);
    for (int label : merged.labels)
      if (label != 0) pass = false;
    grid.at(14, 10) = 1;  // 17 px survives
    LabelGrid kept = postprocess_masks(grid, 6, 0.001);
    int ones = 0;
    for (int label : kept.labels) ones += label == 1;
    if (ones != 17) pass = false;
  }
  report(8, "post-processing (idempotent, 0.1% rule, reference equality)", pass, "");
}

// 9. file formats and the color-wheel golden
void criterion_io() {
  namespace fs = std::filesystem;
  Rng rng(909);
  bool pass = true;
  const fs::path dir = fs::temp_directory_path() / "flowsub_acceptance";
  fs::create_directories(dir);

  for (int trial = 0; trial < 100; ++trial) {
    const int h = 1 + static_cast<int>(rng.uniform_index(10));
    const int w = 1 + static_cast<int>(rng.uniform_index(10));
    FlowGrid flow(h, w);
    for (std::size_t i = 0; i < flow.flat_size(); ++i)
      flow.data()[i] = static_cast<float>(rng.uniform(-50.0, 50.0));
    io::write_flo(flow, dir / "a.flo");
    FlowGrid flow_back = io::read_flo(dir / "a.flo");
    if (std::memcmp(flow_back.data(), flow.data(), flow.flat_size() * sizeof(double)) != 0)
      pass = false;

    ScalarGrid grid(h, w);
    for (std::size_t i = 0; i < grid.size(); ++i)
      grid.data()[i] = static_cast<float>(rng.uniform(-20.0, 20.0));
    io::write_pfm(grid, dir / "a.pfm");
    ScalarGrid grid_back = io::read_pfm(dir / "a.pfm");
    if (std::memcmp(grid_back.data(), grid.data(), grid.size() * sizeof(double)) != 0) pass = false;
  }

  io::write_flo(FlowGrid(1, 1), dir / "single.flo");
  if (fs::file_size(dir / "single.flo") != 20) pass = false;

  static constexpr std::uint8_t kGolden[8 * 8 * 3] = {
      0,  92,  255, 48,  96,  255, 87,  93,  255, 140, 110, 255, 180, 110, 255, 208, 87,  255,
      231, 48,  255, 254, 0,   255, 20,  131, 255, 73,  138, 255, 119, 142, 255, 166, 150, 255,
      206, 150, 255, 232, 119, 255, 254, 73,  255, 255, 20,  209, 34,  168, 255, 92,  177, 255,
      146, 185, 255, 190, 187, 255, 231, 187, 255, 255, 146, 255, 255, 92,  208, 255, 34,  159,
      42,  201, 255, 102, 212, 255, 162, 222, 255, 219, 232, 255, 255, 219, 255, 255, 162, 207,
      255, 102, 157, 255, 42,  106, 42,  232, 255, 102, 243, 255, 162, 254, 255, 219, 255, 227,
      255, 231, 219, 255, 174, 162, 255, 114, 102, 255, 53,  42,  34,  255, 233, 92,  255, 203,
      146, 255, 171, 227, 255, 187, 255, 230, 187, 255, 183, 146, 255, 127, 92,  255, 70,  34,
      20,  255, 148, 73,  255, 115, 147, 255, 119, 238, 255, 150, 255, 227, 150, 255, 184, 119,
      255, 134, 73,  255, 80,  20,  0,   255, 60,  64,  255, 48,  160, 255, 87,  248, 255, 110,
      255, 223, 110, 255, 183, 87,  255, 137, 48,  255, 86,  0};
  FlowGrid wheel_input(8, 8);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) wheel_input.set_uv(r, c, {(c - 3.5) / 2.0, (r - 3.5) / 3.0});
  io::RgbImage image = io::flow_to_color(wheel_input);
  if (image.pixels.size() != sizeof(kGolden) ||
      std::memcmp(image.pixels.data(), kGolden, sizeof(kGolden)) != 0)
    pass = false;

  report(9, "I/O round trips, 20-byte 1x1 .flo, color-wheel golden", pass, "");
}

}  // namespace

int main() {
  criterion_oracle_closure();
  criterion_span_containment();
  criterion_projection_algebra();
  criterion_gradient_correctness();
  criterion_recovery();
  criterion_ablation();
  criterion_metric_oracles();
  criterion_postprocess();
  criterion_io();
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
