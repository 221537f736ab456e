#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "flowsub/camera.hpp"
#include "flowsub/grid.hpp"

namespace flowsub {

/// One rigid motion: angular velocity (rad/s) and linear velocity (m/s).
struct RigidMotionSpec {
  std::array<double, 3> omega{0.0, 0.0, 0.0};
  std::array<double, 3> vel{0.0, 0.0, 0.0};
};

/// Depth of a region as a function of centered pixel coordinates.
struct DepthModel {
  enum class Kind { kConstant, kPlanarRamp, kFrontoOffset };
  Kind kind = Kind::kConstant;
  double z = 5.0;        // kConstant / base of kPlanarRamp, meters
  double slope_u = 0.0;  // kPlanarRamp: meters per centered pixel
  double slope_v = 0.0;
  double offset = 0.0;   // kFrontoOffset: meters in front of the scene base plane

  double eval(double ubar, double vbar, double base_depth) const {
    switch (kind) {
      case Kind::kConstant: return z;
      case Kind::kPlanarRamp: return z + slope_u * ubar + slope_v * vbar;
      case Kind::kFrontoOffset: return base_depth - offset;
    }
    return z;
  }
};

/// Parametric region footprint. kRest claims every pixel no other shape does.
struct Shape {
  enum class Kind { kRectangle, kDisk, kHalfPlane, kRest };
  Kind kind = Kind::kRest;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // kRectangle, inclusive pixel bounds
  double cx = 0, cy = 0, radius = 0;      // kDisk
  double a = 0, b = 0, c = 0;             // kHalfPlane: a*u + b*v <= c

  bool contains(int u, int v) const {
    switch (kind) {
      case Kind::kRectangle: return u >= x0 && u <= x1 && v >= y0 && v <= y1;
      case Kind::kDisk: {
        const double du = u - cx, dv = v - cy;
        return du * du + dv * dv <= radius * radius;
      }
      case Kind::kHalfPlane: return a * u + b * v <= c;
      case Kind::kRest: return false;
    }
    return false;
  }
};

struct RegionSpec {
  Shape shape;
  DepthModel depth;
  RigidMotionSpec motion;
};

/// Ground-truth generator input: camera (focal required), K regions that
/// partition the image, and a seed recorded for provenance. When
/// explicit_labels is set it defines the partition directly (H*W row-major
/// values in [0, K)) and the shapes are ignored.
struct SceneSpec {
  CameraModel camera;
  std::vector<RegionSpec> regions;
  double base_depth = 5.0;
  std::uint64_t seed = 0;
  std::optional<std::vector<int>> explicit_labels;

  int region_count() const { return static_cast<int>(regions.size()); }
};

struct SceneInstance {
  FlowGrid flow;
  DisparityField gt_disparity;
  LabelGrid gt_labels;
  SceneSpec spec;
};

/// Closed-form instantaneous flow of one pixel under a rigid motion, built
/// from the shared intrinsic field values and kMotionExpansionSign so the
/// generator and the basis spans stay convention-consistent.
Vec2 instantaneous_flow(const CameraModel& camera, double depth, const RigidMotionSpec& motion,
                        int u, int v);

/// Resolves the region partition into hard labels; throws InvalidPartition on
/// overlaps, gaps, duplicate kRest regions, or out-of-range explicit labels.
/// background_label is the kRest region's index when present, else 0.
LabelGrid resolve_labels(const SceneSpec& spec);

SceneInstance compose_scene(const SceneSpec& spec);

/// kFrontoTranslation draws in-plane translations (v3 = 0, omega = 0) over
/// constant-depth regions, giving piecewise-constant flow.
enum class MotionStyle { kGeneral, kPureRotation, kPureTranslation, kFrontoTranslation };

struct RandomSceneParams {
  int regions = 3;
  int width = 64;
  int height = 64;
  double depth_min = 2.0;
  double depth_max = 8.0;
  /// Linear-velocity scale (m/s); angular velocities are drawn at a fixed
  /// fraction of it chosen to give both parts comparable pixel magnitudes.
  double motion_scale = 0.4;
  /// Identifiability floor: minimum RMS pixel distance between the flows any
  /// two region motions would induce over the composed scene depth.
  double min_motion_gap = 0.5;
  /// Direction floor: minimum RMS |sin(angle)| between the two flows over the
  /// image. Pointwise-parallel flows differ only by a per-pixel scale, which
  /// the disparity gauge can absorb, so a magnitude gap alone does not make
  /// the regions distinguishable.
  double min_direction_gap = 0.15;
  MotionStyle motion_style = MotionStyle::kGeneral;
  int max_attempts = 64;
};

/// Deterministic in seed. Guarantees every region covers at least 2% of the
/// pixels and that motions are pairwise distinct per min_motion_gap.
SceneSpec random_scene(std::uint64_t seed, const RandomSceneParams& params);

}  // namespace flowsub
