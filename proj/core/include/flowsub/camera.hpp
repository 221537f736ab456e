#pragma once

#include <optional>

#include "flowsub/error.hpp"

namespace flowsub {

struct Focal {
  double fx = 1.0;
  double fy = 1.0;
};

/// Pinhole camera over an H x W pixel grid. Pixel coordinates (u, v) are
/// (column, row) at integer pixel centers; centered coordinates are
/// ubar = u - cx, vbar = v - cy. focal is optional: without it only the
/// focal-length-free basis can be built.
struct CameraModel {
  int width = 0;
  int height = 0;
  double cx = 0.0;
  double cy = 0.0;
  std::optional<Focal> focal;

  /// Camera with the principal point at the image center, c = ((W-1)/2, (H-1)/2).
  static CameraModel centered(int width, int height, std::optional<Focal> focal = std::nullopt) {
    if (width < 2 || height < 2) throw Error(ErrorCode::kParamOutOfRange, "camera needs dims >= 2");
    return {width, height, (width - 1) / 2.0, (height - 1) / 2.0, focal};
  }

  double ubar(int u) const { return u - cx; }
  double vbar(int v) const { return v - cy; }

  const Focal& require_focal() const {
    if (!focal) throw Error(ErrorCode::kMissingFocal, "operation requires focal lengths");
    return *focal;
  }

  void require_dims(int h, int w) const {
    if (h != height || w != width)
      throw Error(ErrorCode::kDimensionMismatch, "grid dimensions do not match camera");
  }
};

}  // namespace flowsub
