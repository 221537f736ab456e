#pragma once

#include <array>
#include <string>
#include <vector>

#include "flowsub/camera.hpp"
#include "flowsub/grid.hpp"

namespace flowsub {

/// Which family of basis flow fields a stack holds.
///   kIntrinsic6:       (b_Tx, b_Ty, b_Tz, b_Rx, b_Ry, b_Rz), needs focal lengths.
///   kFocalFree8:       (b_Tx, b_Ty, b_Tz, b_R1x, b_R2x, b_R1y, b_R2y, b_Rz),
///                      valid without knowing fx, fy (assumes fx == fy).
///   kTranslationOnly:  the leading 3 translational fields of either family.
///   kRotationOnly:     the trailing rotational fields (3 intrinsic, 5 focal-free).
enum class BasisKind { kIntrinsic6, kFocalFree8, kTranslationOnly, kRotationOnly };

const char* to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& name);

/// Ordered stack of basis flow fields. Translational fields come first and
/// factor as disparity times a disparity-free template; the templates are kept
/// alongside so normalization can rescale the template instead of the product.
struct BasisStack {
  BasisKind kind = BasisKind::kFocalFree8;
  int height = 0;
  int width = 0;
  bool normalized = false;
  /// Set by normalize_basis when a field is identically zero (e.g. d == 0
  /// everywhere) and therefore could not be rescaled.
  bool has_zero_field = false;
  std::vector<FlowGrid> fields;
  /// One template per translational field, same order; empty for kRotationOnly
  /// and for restricted stacks.
  std::vector<FlowGrid> templates;

  int translation_count() const { return kind == BasisKind::kRotationOnly ? 0 : 3; }
  int field_count() const { return static_cast<int>(fields.size()); }
};

/// Region i holds the unrestricted fields multiplied pixel-wise by mask i.
struct RegionBases {
  std::vector<BasisStack> per_region;

  int region_count() const { return static_cast<int>(per_region.size()); }
};

/// Values of the six intrinsic basis fields at one pixel, given centered
/// coordinates and disparity, in stack order (Tx, Ty, Tz, Rx, Ry, Rz).
std::array<Vec2, 6> intrinsic_field_values(const Focal& focal, double ubar, double vbar, double d);

/// Signs combining the intrinsic fields (in stack order) into the instantaneous
/// flow of a rigid motion with coefficients (v1, v2, v3, w1, w2, w3). The scene
/// generator uses exactly this constant so that generated flows and basis spans
/// share one sign convention.
inline constexpr std::array<double, 6> kMotionExpansionSign = {-1.0, -1.0, -1.0, +1.0, -1.0, +1.0};

/// The six-field basis that requires focal lengths. Unnormalized.
BasisStack intrinsic_basis(const CameraModel& camera, const DisparityField& disparity);

/// The eight-field basis independent of focal lengths. Unnormalized.
BasisStack focal_free_basis(const CameraModel& camera, const DisparityField& disparity);

/// Rescales each translational template to Frobenius norm 2 (re-multiplying by
/// disparity) and each rotational field to Frobenius norm 1, treating a field
/// as one vector over all 2*H*W entries. Zero fields are left zero and set
/// has_zero_field. Already-normalized stacks are returned unchanged, which
/// makes the operation exactly idempotent.
BasisStack normalize_basis(const BasisStack& basis, const DisparityField& disparity);

/// Keeps the translational or rotational slice of a stack, preserving order.
BasisStack subset_basis(const BasisStack& basis, BasisKind part);

/// Pixel-wise product of every field with each region's mask (broadcast over
/// the two flow channels).
RegionBases restrict_basis(const BasisStack& basis, const SoftMaskStack& masks);

/// Convenience pipeline: build the family for `kind`, normalize, and subset
/// when `kind` is an ablation slice. Subset kinds derive from the focal-free
/// family (translational fields coincide across families once normalized).
BasisStack normalized_basis_for(const CameraModel& camera, const DisparityField& disparity,
                                BasisKind kind);

}  // namespace flowsub
