#include "flowsub/scene.hpp"

#include <cmath>
#include <string>

#include "flowsub/basis.hpp"
#include "flowsub/rng.hpp"

namespace flowsub {

Vec2 instantaneous_flow(const CameraModel& camera, double depth, const RigidMotionSpec& motion,
                        int u, int v) {
  const Focal& focal = camera.require_focal();
  if (!(depth > 0.0)) throw Error(ErrorCode::kNonPositiveDepth, "depth must be positive");

  const double d = 1.0 / depth;
  const auto fields = intrinsic_field_values(focal, camera.ubar(u), camera.vbar(v), d);
  const std::array<double, 6> coefficients = {motion.vel[0],   motion.vel[1],   motion.vel[2],
                                              motion.omega[0], motion.omega[1], motion.omega[2]};
  Vec2 flow;
  for (int j = 0; j < 6; ++j) {
    const double weight = kMotionExpansionSign[j] * coefficients[j];
    flow.u += weight * fields[j].u;
    flow.v += weight * fields[j].v;
  }
  return flow;
}

LabelGrid resolve_labels(const SceneSpec& spec) {
  const int h = spec.camera.height, w = spec.camera.width;
  const int k = spec.region_count();
  if (k < 1) throw Error(ErrorCode::kInvalidPartition, "scene needs at least one region");

  LabelGrid labels(h, w, -1);

  if (spec.explicit_labels) {
    if (static_cast<int>(spec.explicit_labels->size()) != h * w)
      throw Error(ErrorCode::kInvalidPartition, "explicit label grid has wrong size");
    for (int i = 0; i < h * w; ++i) {
      const int label = (*spec.explicit_labels)[i];
      if (label < 0 || label >= k)
        throw Error(ErrorCode::kInvalidPartition, "explicit label outside [0, K)");
      labels.labels[i] = label;
    }
    labels.background_label = 0;
    return labels;
  }

  int rest_region = -1;
  for (int i = 0; i < k; ++i) {
    if (spec.regions[i].shape.kind == Shape::Kind::kRest) {
      if (rest_region >= 0)
        throw Error(ErrorCode::kInvalidPartition, "more than one rest region");
      rest_region = i;
    }
  }

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      int owner = -1;
      for (int i = 0; i < k; ++i) {
        if (spec.regions[i].shape.contains(c, r)) {
          if (owner >= 0)
            throw Error(ErrorCode::kInvalidPartition,
                        "regions " + std::to_string(owner) + " and " + std::to_string(i) +
                            " overlap at pixel (" + std::to_string(c) + ", " + std::to_string(r) + ")");
          owner = i;
        }
      }
      if (owner < 0) {
        if (rest_region < 0)
          throw Error(ErrorCode::kInvalidPartition, "uncovered pixel and no rest region");
        owner = rest_region;
      }
      labels.at(r, c) = owner;
    }
  }
  labels.background_label = rest_region >= 0 ? rest_region : 0;
  return labels;
}

SceneInstance compose_scene(const SceneSpec& spec) {
  spec.camera.require_focal();
  const int h = spec.camera.height, w = spec.camera.width;

  SceneInstance instance;
  instance.spec = spec;
  instance.gt_labels = resolve_labels(spec);
  instance.flow = FlowGrid(h, w);
  instance.gt_disparity = DisparityField(h, w);

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const RegionSpec& region = spec.regions[instance.gt_labels.at(r, c)];
      const double depth =
          region.depth.eval(spec.camera.ubar(c), spec.camera.vbar(r), spec.base_depth);
      if (!(depth > 0.0))
        throw Error(ErrorCode::kNonPositiveDepth, "region depth model is nonpositive at a pixel");
      instance.gt_disparity.at(r, c) = 1.0 / depth;
      instance.flow.set_uv(r, c, instantaneous_flow(spec.camera, depth, region.motion, c, r));
    }
  }
  return instance;
}

namespace {

constexpr double kOmegaRatio = 0.15;  // rad/s per m/s of motion_scale
constexpr double kMinRegionFraction = 0.02;

RigidMotionSpec draw_motion(Rng& rng, const RandomSceneParams& params) {
  RigidMotionSpec motion;
  const double omega_scale = params.motion_scale * kOmegaRatio *
                             (params.motion_style == MotionStyle::kPureRotation ? 2.0 : 1.0);
  for (int i = 0; i < 3; ++i) {
    motion.vel[i] = rng.uniform(-1.0, 1.0) * params.motion_scale;
    motion.omega[i] = rng.uniform(-1.0, 1.0) * omega_scale;
  }
  switch (params.motion_style) {
    case MotionStyle::kGeneral:
      break;
    case MotionStyle::kPureRotation:
      motion.vel = {0.0, 0.0, 0.0};
      break;
    case MotionStyle::kPureTranslation:
      motion.omega = {0.0, 0.0, 0.0};
      break;
    case MotionStyle::kFrontoTranslation:
      motion.omega = {0.0, 0.0, 0.0};
      motion.vel[2] = 0.0;
      break;
  }
  return motion;
}

DepthModel draw_depth_model(Rng& rng, const RandomSceneParams& params, double base_depth,
                            double max_ubar, double max_vbar) {
  DepthModel model;
  // fronto-translation scenes stay piecewise-constant in flow, so their depth
  // models are constant planes
  const std::uint64_t kind =
      params.motion_style == MotionStyle::kFrontoTranslation ? 0 : rng.uniform_index(3);
  const double z = rng.uniform(params.depth_min, params.depth_max);
  if (kind == 0) {
    model.kind = DepthModel::Kind::kConstant;
    model.z = z;
  } else if (kind == 1) {
    model.kind = DepthModel::Kind::kPlanarRamp;
    model.z = z;
    // keep the plane comfortably positive over the whole image
    const double headroom = 0.5 * (z - 0.5 * params.depth_min);
    model.slope_u = rng.uniform(-1.0, 1.0) * headroom / (2.0 * max_ubar);
    model.slope_v = rng.uniform(-1.0, 1.0) * headroom / (2.0 * max_vbar);
  } else {
    model.kind = DepthModel::Kind::kFrontoOffset;
    model.offset = base_depth - z;  // lands on depth z
  }
  return model;
}

Shape draw_object_shape(Rng& rng, int width, int height) {
  Shape shape;
  const double area_fraction = rng.uniform(0.04, 0.16);
  const double area = area_fraction * width * height;
  if (rng.uniform_index(2) == 0) {
    shape.kind = Shape::Kind::kDisk;
    shape.radius = std::sqrt(area / M_PI);
    shape.cx = rng.uniform(shape.radius, width - 1 - shape.radius);
    shape.cy = rng.uniform(shape.radius, height - 1 - shape.radius);
  } else {
    shape.kind = Shape::Kind::kRectangle;
    const double aspect = rng.uniform(0.6, 1.6);
    const double sw = std::sqrt(area * aspect);
    const double sh = area / sw;
    shape.x0 = rng.uniform(0.0, width - 1 - sw);
    shape.y0 = rng.uniform(0.0, height - 1 - sh);
    shape.x1 = shape.x0 + sw;
    shape.y1 = shape.y0 + sh;
  }
  return shape;
}

struct MotionGap {
  double magnitude = 0.0;  // RMS pixel distance between the induced flows
  double direction = 0.0;  // RMS |sin(angle)| between them
};

MotionGap motion_gap(const SceneSpec& spec, const DisparityField& disparity,
                     const RigidMotionSpec& a, const RigidMotionSpec& b) {
  double sum = 0.0, cross_sum = 0.0;
  const int h = spec.camera.height, w = spec.camera.width;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const double depth = 1.0 / disparity.at(r, c);
      const Vec2 fa = instantaneous_flow(spec.camera, depth, a, c, r);
      const Vec2 fb = instantaneous_flow(spec.camera, depth, b, c, r);
      sum += (fa.u - fb.u) * (fa.u - fb.u) + (fa.v - fb.v) * (fa.v - fb.v);
      const double na = std::hypot(fa.u, fa.v), nb = std::hypot(fb.u, fb.v);
      const double cross = fa.u * fb.v - fa.v * fb.u;
      const double sine = cross / std::max(na * nb, 1e-12);
      cross_sum += sine * sine;
    }
  const double n = static_cast<double>(h) * w;
  return {std::sqrt(sum / n), std::sqrt(cross_sum / n)};
}

}  // namespace

SceneSpec random_scene(std::uint64_t seed, const RandomSceneParams& params) {
  if (params.regions < 1) throw Error(ErrorCode::kParamOutOfRange, "need K >= 1");
  if (params.width < 8 || params.height < 8)
    throw Error(ErrorCode::kParamOutOfRange, "need dims >= 8x8");
  if (!(params.depth_min > 0.0 && params.depth_max > params.depth_min))
    throw Error(ErrorCode::kParamOutOfRange, "need 0 < depth_min < depth_max");
  if (!(params.motion_scale > 0.0)) throw Error(ErrorCode::kParamOutOfRange, "motion_scale must be > 0");

  Rng rng(seed);
  const double focal_length = static_cast<double>(params.width);
  const double base_depth = 0.5 * (params.depth_min + params.depth_max);
  const double max_ubar = 0.5 * params.width;
  const double max_vbar = 0.5 * params.height;

  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    SceneSpec spec;
    spec.camera = CameraModel::centered(params.width, params.height,
                                        Focal{focal_length, focal_length});
    spec.base_depth = base_depth;
    spec.seed = seed;
    spec.regions.resize(params.regions);

    for (int i = 0; i < params.regions; ++i) {
      spec.regions[i].shape =
          (i + 1 == params.regions) ? Shape{} : draw_object_shape(rng, params.width, params.height);
      spec.regions[i].depth = draw_depth_model(rng, params, base_depth, max_ubar, max_vbar);
      spec.regions[i].motion = draw_motion(rng, params);
    }

    SceneInstance instance;
    try {
      instance = compose_scene(spec);
    } catch (const Error&) {
      continue;  // overlapping shapes or a nonpositive depth draw
    }

    std::vector<int> region_pixels(params.regions, 0);
    for (int label : instance.gt_labels.labels) ++region_pixels[label];
    const int min_pixels =
        static_cast<int>(kMinRegionFraction * params.width * params.height);
    bool degenerate = false;
    for (int count : region_pixels) degenerate |= count < min_pixels;
    if (degenerate) continue;

    bool distinct = true;
    for (int i = 0; i < params.regions && distinct; ++i)
      for (int j = i + 1; j < params.regions && distinct; ++j) {
        const MotionGap gap = motion_gap(spec, instance.gt_disparity, spec.regions[i].motion,
                                         spec.regions[j].motion);
        distinct = gap.magnitude >= params.min_motion_gap &&
                   gap.direction >= params.min_direction_gap;
      }
    if (!distinct) continue;

    return spec;
  }
  throw Error(ErrorCode::kDegenerateScene,
              "could not draw a valid scene in " + std::to_string(params.max_attempts) + " attempts");
}

}  // namespace flowsub
