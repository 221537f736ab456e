#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "flowsub/error.hpp"

namespace flowsub {

struct Vec2 {
  double u = 0.0;
  double v = 0.0;
};

/// H x W grid of doubles, row-major.
class ScalarGrid {
 public:
  ScalarGrid() = default;
  ScalarGrid(int height, int width, double fill = 0.0)
      : height_(height), width_(width), values_(static_cast<std::size_t>(height) * width, fill) {
    if (height < 0 || width < 0) throw Error(ErrorCode::kParamOutOfRange, "negative grid dims");
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& at(int r, int c) { return values_[static_cast<std::size_t>(r) * width_ + c]; }
  double at(int r, int c) const { return values_[static_cast<std::size_t>(r) * width_ + c]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  Eigen::Map<Eigen::VectorXd> vec() { return {values_.data(), static_cast<Eigen::Index>(values_.size())}; }
  Eigen::Map<const Eigen::VectorXd> vec() const {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  bool same_shape(const ScalarGrid& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

 private:
  int height_ = 0, width_ = 0;
  std::vector<double> values_;
};

/// Inverse depth (1/m), one value per pixel; values must be finite and >= 0.
using DisparityField = ScalarGrid;

/// Two-channel per-pixel motion. Storage fixes the flattening convention used
/// everywhere a flow field becomes a vector (system-matrix columns, norms):
/// row-major pixels, channel-last, i.e. element 2*(r*W + c) is the u component
/// of pixel (r, c) and 2*(r*W + c) + 1 its v component.
class FlowGrid {
 public:
  FlowGrid() = default;
  FlowGrid(int height, int width)
      : height_(height), width_(width), values_(2 * static_cast<std::size_t>(height) * width, 0.0) {
    if (height < 0 || width < 0) throw Error(ErrorCode::kParamOutOfRange, "negative grid dims");
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t flat_size() const { return values_.size(); }  // 2*H*W

  double& at(int r, int c, int ch) { return values_[2 * (static_cast<std::size_t>(r) * width_ + c) + ch]; }
  double at(int r, int c, int ch) const {
    return values_[2 * (static_cast<std::size_t>(r) * width_ + c) + ch];
  }

  Vec2 uv(int r, int c) const { return {at(r, c, 0), at(r, c, 1)}; }
  void set_uv(int r, int c, Vec2 value) {
    at(r, c, 0) = value.u;
    at(r, c, 1) = value.v;
  }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  Eigen::Map<Eigen::VectorXd> vec() { return {values_.data(), static_cast<Eigen::Index>(values_.size())}; }
  Eigen::Map<const Eigen::VectorXd> vec() const {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  bool same_shape(const FlowGrid& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

 private:
  int height_ = 0, width_ = 0;
  std::vector<double> values_;
};

/// H x W x K per-pixel region weights; channel index varies fastest.
class MaskStack {
 public:
  MaskStack() = default;
  MaskStack(int height, int width, int regions, double fill = 0.0)
      : height_(height),
        width_(width),
        regions_(regions),
        values_(static_cast<std::size_t>(height) * width * regions, fill) {
    if (height < 0 || width < 0 || regions < 1)
      throw Error(ErrorCode::kParamOutOfRange, "mask stack needs K >= 1 and nonnegative dims");
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int regions() const { return regions_; }
  std::size_t size() const { return values_.size(); }

  double& at(int r, int c, int k) {
    return values_[(static_cast<std::size_t>(r) * width_ + c) * regions_ + k];
  }
  double at(int r, int c, int k) const {
    return values_[(static_cast<std::size_t>(r) * width_ + c) * regions_ + k];
  }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  Eigen::Map<Eigen::VectorXd> vec() { return {values_.data(), static_cast<Eigen::Index>(values_.size())}; }
  Eigen::Map<const Eigen::VectorXd> vec() const {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  bool same_shape(const MaskStack& other) const {
    return height_ == other.height_ && width_ == other.width_ && regions_ == other.regions_;
  }

 private:
  int height_ = 0, width_ = 0, regions_ = 0;
  std::vector<double> values_;
};

/// Per-pixel weights in [0,1] summing to 1 across channels (soft assignment).
using SoftMaskStack = MaskStack;

/// Integer segmentation map. background_label marks the label FG-ARI excludes;
/// it is part of the grid's declaration whether or not it occurs in labels.
struct LabelGrid {
  int height = 0, width = 0;
  std::vector<int> labels;
  int background_label = 0;

  LabelGrid() = default;
  LabelGrid(int h, int w, int fill = 0, int background = 0)
      : height(h), width(w), labels(static_cast<std::size_t>(h) * w, fill), background_label(background) {}

  int& at(int r, int c) { return labels[static_cast<std::size_t>(r) * width + c]; }
  int at(int r, int c) const { return labels[static_cast<std::size_t>(r) * width + c]; }
  std::size_t size() const { return labels.size(); }
  bool same_shape(const LabelGrid& other) const {
    return height == other.height && width == other.width;
  }
};

/// Throws unless every value is finite and >= 0.
inline void require_valid_disparity(const DisparityField& disparity) {
  for (std::size_t i = 0; i < disparity.size(); ++i) {
    double d = disparity.data()[i];
    if (!std::isfinite(d)) throw Error(ErrorCode::kNonFiniteInput, "disparity has non-finite entries");
    if (d < 0.0) throw Error(ErrorCode::kParamOutOfRange, "disparity must be nonnegative");
  }
}

/// Throws unless weights lie in [0,1] and sum to 1 per pixel within 1e-6.
inline void require_soft_masks(const SoftMaskStack& masks) {
  for (int r = 0; r < masks.height(); ++r) {
    for (int c = 0; c < masks.width(); ++c) {
      double sum = 0.0;
      for (int k = 0; k < masks.regions(); ++k) {
        double m = masks.at(r, c, k);
        if (!(m >= -1e-9 && m <= 1.0 + 1e-9))
          throw Error(ErrorCode::kParamOutOfRange, "mask weight outside [0,1]");
        sum += m;
      }
      if (std::abs(sum - 1.0) > 1e-6)
        throw Error(ErrorCode::kParamOutOfRange, "mask weights do not sum to 1");
    }
  }
}

}  // namespace flowsub
