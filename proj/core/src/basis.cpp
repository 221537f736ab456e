#include "flowsub/basis.hpp"

#include <cmath>

namespace flowsub {

const char* to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::kIntrinsic6: return "intrinsic6";
    case BasisKind::kFocalFree8: return "focalFree8";
    case BasisKind::kTranslationOnly: return "translationOnly";
    case BasisKind::kRotationOnly: return "rotationOnly";
  }
  return "unknown";
}

BasisKind basis_kind_from_string(const std::string& name) {
  if (name == "intrinsic6") return BasisKind::kIntrinsic6;
  if (name == "focalFree8") return BasisKind::kFocalFree8;
  if (name == "translationOnly") return BasisKind::kTranslationOnly;
  if (name == "rotationOnly") return BasisKind::kRotationOnly;
  throw Error(ErrorCode::kBadInput, "unknown basis kind '" + name + "'");
}

std::array<Vec2, 6> intrinsic_field_values(const Focal& focal, double ubar, double vbar, double d) {
  const double fx = focal.fx, fy = focal.fy;
  return {
      Vec2{fx * d, 0.0},                                      // Tx
      Vec2{0.0, fy * d},                                      // Ty
      Vec2{-ubar * d, -vbar * d},                             // Tz
      Vec2{ubar * vbar / fy, fy + vbar * vbar / fy},          // Rx
      Vec2{fx + ubar * ubar / fx, ubar * vbar / fx},          // Ry
      Vec2{fx * vbar / fy, -fy * ubar / fx},                  // Rz
  };
}

namespace {

void require_grid_matches(const CameraModel& camera, const DisparityField& disparity) {
  camera.require_dims(disparity.height(), disparity.width());
}

}  // namespace

BasisStack intrinsic_basis(const CameraModel& camera, const DisparityField& disparity) {
  const Focal& focal = camera.require_focal();
  require_grid_matches(camera, disparity);

  const int h = camera.height, w = camera.width;
  BasisStack stack;
  stack.kind = BasisKind::kIntrinsic6;
  stack.height = h;
  stack.width = w;
  stack.fields.assign(6, FlowGrid(h, w));
  stack.templates.assign(3, FlowGrid(h, w));

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double ub = camera.ubar(c), vb = camera.vbar(r);
      const double d = disparity.at(r, c);
      auto values = intrinsic_field_values(focal, ub, vb, d);
      for (int j = 0; j < 6; ++j) stack.fields[j].set_uv(r, c, values[j]);
      stack.templates[0].set_uv(r, c, {focal.fx, 0.0});
      stack.templates[1].set_uv(r, c, {0.0, focal.fy});
      stack.templates[2].set_uv(r, c, {-ub, -vb});
    }
  }
  return stack;
}

BasisStack focal_free_basis(const CameraModel& camera, const DisparityField& disparity) {
  require_grid_matches(camera, disparity);

  const int h = camera.height, w = camera.width;
  BasisStack stack;
  stack.kind = BasisKind::kFocalFree8;
  stack.height = h;
  stack.width = w;
  stack.fields.assign(8, FlowGrid(h, w));
  stack.templates.assign(3, FlowGrid(h, w));

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double ub = camera.ubar(c), vb = camera.vbar(r);
      const double d = disparity.at(r, c);
      stack.fields[0].set_uv(r, c, {d, 0.0});                // Tx / fx
      stack.fields[1].set_uv(r, c, {0.0, d});                // Ty / fy
      stack.fields[2].set_uv(r, c, {-ub * d, -vb * d});      // Tz
      stack.fields[3].set_uv(r, c, {0.0, 1.0});              // R1x
      stack.fields[4].set_uv(r, c, {ub * vb, vb * vb});      // R2x
      stack.fields[5].set_uv(r, c, {1.0, 0.0});              // R1y
      stack.fields[6].set_uv(r, c, {ub * ub, ub * vb});      // R2y
      stack.fields[7].set_uv(r, c, {vb, -ub});               // Rz
      stack.templates[0].set_uv(r, c, {1.0, 0.0});
      stack.templates[1].set_uv(r, c, {0.0, 1.0});
      stack.templates[2].set_uv(r, c, {-ub, -vb});
    }
  }
  return stack;
}

BasisStack normalize_basis(const BasisStack& basis, const DisparityField& disparity) {
  if (basis.normalized) return basis;
  if (disparity.height() != basis.height || disparity.width() != basis.width)
    throw Error(ErrorCode::kDimensionMismatch, "disparity does not match basis dims");
  if (static_cast<int>(basis.templates.size()) != basis.translation_count())
    throw Error(ErrorCode::kBadInput, "basis stack is missing translational templates");

  BasisStack out = basis;
  out.normalized = true;
  out.has_zero_field = false;

  const int n_trans = basis.translation_count();
  for (int j = 0; j < basis.field_count(); ++j) {
    if (j < n_trans) {
      const double norm = basis.templates[j].vec().norm();
      if (norm == 0.0) {
        out.has_zero_field = true;
        continue;
      }
      const double scale = 2.0 / norm;
      out.templates[j].vec() *= scale;
      // field = d * template, so rescaling the template rescales the field
      FlowGrid& field = out.fields[j];
      for (int r = 0; r < basis.height; ++r)
        for (int c = 0; c < basis.width; ++c) {
          const double d = disparity.at(r, c);
          Vec2 t = out.templates[j].uv(r, c);
          field.set_uv(r, c, {d * t.u, d * t.v});
        }
      if (field.vec().norm() == 0.0) out.has_zero_field = true;
    } else {
      const double norm = basis.fields[j].vec().norm();
      if (norm == 0.0) {
        out.has_zero_field = true;
        continue;
      }
      out.fields[j].vec() *= 1.0 / norm;
    }
  }
  return out;
}

BasisStack subset_basis(const BasisStack& basis, BasisKind part) {
  if (basis.kind != BasisKind::kIntrinsic6 && basis.kind != BasisKind::kFocalFree8)
    throw Error(ErrorCode::kBadInput, "can only subset a full basis stack");

  BasisStack out;
  out.height = basis.height;
  out.width = basis.width;
  out.normalized = basis.normalized;
  out.has_zero_field = basis.has_zero_field;
  out.kind = part;

  if (part == BasisKind::kTranslationOnly) {
    out.fields.assign(basis.fields.begin(), basis.fields.begin() + 3);
    out.templates = basis.templates;
  } else if (part == BasisKind::kRotationOnly) {
    out.fields.assign(basis.fields.begin() + 3, basis.fields.end());
  } else {
    throw Error(ErrorCode::kBadInput, "subset must be translationOnly or rotationOnly");
  }
  return out;
}

BasisStack normalized_basis_for(const CameraModel& camera, const DisparityField& disparity,
                                BasisKind kind) {
  BasisStack full = (kind == BasisKind::kIntrinsic6) ? intrinsic_basis(camera, disparity)
                                                     : focal_free_basis(camera, disparity);
  BasisStack normalized = normalize_basis(full, disparity);
  if (kind == BasisKind::kTranslationOnly || kind == BasisKind::kRotationOnly)
    return subset_basis(normalized, kind);
  return normalized;
}

RegionBases restrict_basis(const BasisStack& basis, const SoftMaskStack& masks) {
  if (masks.height() != basis.height || masks.width() != basis.width)
    throw Error(ErrorCode::kDimensionMismatch, "masks do not match basis dims");

  RegionBases regions;
  regions.per_region.reserve(masks.regions());
  for (int k = 0; k < masks.regions(); ++k) {
    BasisStack restricted;
    restricted.kind = basis.kind;
    restricted.height = basis.height;
    restricted.width = basis.width;
    restricted.normalized = basis.normalized;
    restricted.fields.reserve(basis.fields.size());
    for (const FlowGrid& field : basis.fields) {
      FlowGrid masked(basis.height, basis.width);
      for (int r = 0; r < basis.height; ++r)
        for (int c = 0; c < basis.width; ++c) {
          const double m = masks.at(r, c, k);
          masked.at(r, c, 0) = m * field.at(r, c, 0);
          masked.at(r, c, 1) = m * field.at(r, c, 1);
        }
      restricted.fields.push_back(std::move(masked));
    }
    regions.per_region.push_back(std::move(restricted));
  }
  return regions;
}

}  // namespace flowsub
