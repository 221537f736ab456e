#include <doctest.h>

#include "flowsub/projector.hpp"
#include "flowsub/scene.hpp"
#include "flowsub/serialization.hpp"
#include "support/oracles.hpp"

using namespace flowsub;

namespace {

SceneSpec two_half_planes(int size, RigidMotionSpec left, RigidMotionSpec right) {
  SceneSpec spec;
  spec.camera = CameraModel::centered(size, size, Focal{double(size), double(size)});
  RegionSpec a, b;
  a.shape = {Shape::Kind::kHalfPlane, 0, 0, 0, 0, 0, 0, 0, 1.0, 0.0, (size - 1) / 2.0};
  b.shape.kind = Shape::Kind::kRest;
  a.depth = {DepthModel::Kind::kConstant, 4.0, 0, 0, 0};
  b.depth = {DepthModel::Kind::kConstant, 6.0, 0, 0, 0};
  a.motion = left;
  b.motion = right;
  spec.regions = {a, b};
  return spec;
}

}  // namespace

TEST_CASE("instantaneous flow closed-form values") {
  CameraModel camera = CameraModel::centered(9, 9, Focal{1.0, 1.0});

  SUBCASE("pure z-rotation vanishes at the principal point") {
    RigidMotionSpec motion{{0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}};
    Vec2 flow = instantaneous_flow(camera, 3.0, motion, 4, 4);
    CHECK(flow.u == 0.0);
    CHECK(flow.v == 0.0);
  }

  SUBCASE("x-translation gives u' = -fx d v1") {
    RigidMotionSpec motion{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    Vec2 flow = instantaneous_flow(camera, 2.0, motion, 7, 2);  // d = 0.5
    CHECK(flow.u == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(flow.v == 0.0);
  }

  SUBCASE("z-translation scales centered coordinates") {
    RigidMotionSpec motion{{0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}};
    Vec2 flow = instantaneous_flow(camera, 1.0, motion, 6, 7);  // ubar=2, vbar=3
    CHECK(flow.u == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(flow.v == doctest::Approx(3.0).epsilon(1e-15));
  }

  SUBCASE("nonpositive depth is rejected") {
    RigidMotionSpec motion;
    CHECK_THROWS_AS(instantaneous_flow(camera, 0.0, motion, 1, 1), Error);
  }
}

TEST_CASE("static single-region scene has zero flow") {
  SceneSpec spec;
  spec.camera = CameraModel::centered(16, 16, Focal{16.0, 16.0});
  spec.regions.resize(1);
  spec.regions[0].shape.kind = Shape::Kind::kRest;
  spec.regions[0].depth = {DepthModel::Kind::kConstant, 5.0, 0, 0, 0};
  SceneInstance instance = compose_scene(spec);
  CHECK(instance.flow.vec().norm() == 0.0);
  CHECK(instance.gt_disparity.at(3, 3) == doctest::Approx(0.2));
}

TEST_CASE("two half-planes translate piecewise with a sharp boundary") {
  RigidMotionSpec left{{0, 0, 0}, {0.5, 0.0, 0.0}};
  RigidMotionSpec right{{0, 0, 0}, {0.0, 0.5, 0.0}};
  const int size = 16;
  SceneSpec spec = two_half_planes(size, left, right);
  SceneInstance instance = compose_scene(spec);

  const int split = (size - 1) / 2;
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      const Vec2 flow = instance.flow.uv(r, c);
      if (c <= split) {
        CHECK(flow.u != 0.0);
        CHECK(flow.v == 0.0);
        CHECK(instance.gt_labels.at(r, c) == 0);
      } else {
        CHECK(flow.u == 0.0);
        CHECK(flow.v != 0.0);
        CHECK(instance.gt_labels.at(r, c) == 1);
      }
    }
  // discontinuity exactly at the shared boundary
  CHECK(instance.flow.at(0, split, 0) != instance.flow.at(0, split + 1, 0));
}

TEST_CASE("composed flow equals per-pixel recomputation") {
  RandomSceneParams params;
  params.regions = 3;
  SceneSpec spec = random_scene(41, params);
  SceneInstance instance = compose_scene(spec);

  Rng rng(99);
  for (int sample = 0; sample < 50; ++sample) {
    const int r = static_cast<int>(rng.uniform_index(params.height));
    const int c = static_cast<int>(rng.uniform_index(params.width));
    const RegionSpec& region = spec.regions[instance.gt_labels.at(r, c)];
    const double depth = region.depth.eval(spec.camera.ubar(c), spec.camera.vbar(r), spec.base_depth);
    const Vec2 expected = instantaneous_flow(spec.camera, depth, region.motion, c, r);
    CHECK(instance.flow.at(r, c, 0) == expected.u);
    CHECK(instance.flow.at(r, c, 1) == expected.v);
  }
}

TEST_CASE("partition violations are rejected") {
  SceneSpec spec;
  spec.camera = CameraModel::centered(8, 8, Focal{8.0, 8.0});
  spec.regions.resize(2);

  SUBCASE("overlap") {
    spec.regions[0].shape = {Shape::Kind::kRectangle, 0, 0, 5, 5};
    spec.regions[1].shape = {Shape::Kind::kRectangle, 3, 3, 7, 7};
  }
  SUBCASE("gap without rest region") {
    spec.regions[0].shape = {Shape::Kind::kRectangle, 0, 0, 3, 3};
    spec.regions[1].shape = {Shape::Kind::kRectangle, 5, 5, 7, 7};
  }
  SUBCASE("duplicate rest regions") {
    spec.regions[0].shape.kind = Shape::Kind::kRest;
    spec.regions[1].shape.kind = Shape::Kind::kRest;
  }
  SUBCASE("explicit labels out of range") {
    spec.explicit_labels = std::vector<int>(64, 7);
  }

  CHECK_THROWS_AS(resolve_labels(spec), Error);
}

TEST_CASE("nonpositive region depth is rejected at composition") {
  SceneSpec spec;
  spec.camera = CameraModel::centered(8, 8, Focal{8.0, 8.0});
  spec.regions.resize(1);
  spec.regions[0].shape.kind = Shape::Kind::kRest;
  spec.regions[0].depth = {DepthModel::Kind::kPlanarRamp, 1.0, 2.0, 0.0, 0.0};  // dips negative
  CHECK_THROWS_AS(compose_scene(spec), Error);
}

TEST_CASE("random_scene is deterministic and respects K=1") {
  RandomSceneParams params;
  params.regions = 2;
  CHECK(scene_spec_to_json(random_scene(7, params)) == scene_spec_to_json(random_scene(7, params)));

  params.regions = 1;
  SceneSpec single = random_scene(7, params);
  REQUIRE(single.region_count() == 1);
  CHECK(single.regions[0].shape.kind == Shape::Kind::kRest);
  LabelGrid labels = resolve_labels(single);
  for (int label : labels.labels) CHECK(label == 0);
}

TEST_CASE("hundred-seed sweep yields no degenerate regions") {
  RandomSceneParams params;
  params.regions = 3;
  const int min_pixels = static_cast<int>(0.02 * params.width * params.height);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SceneSpec spec = random_scene(seed, params);
    SceneInstance instance = compose_scene(spec);
    std::vector<int> counts(3, 0);
    for (int label : instance.gt_labels.labels) ++counts[label];
    for (int count : counts) CHECK(count >= min_pixels);
  }
}

TEST_CASE("ground-truth flow lies in its own restricted span") {
  RandomSceneParams params;
  params.regions = 3;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SceneSpec spec = random_scene(seed, params);
    SceneInstance instance = compose_scene(spec);
    BasisStack basis =
        normalize_basis(focal_free_basis(spec.camera, instance.gt_disparity), instance.gt_disparity);
    SoftMaskStack masks = oracles::one_hot_masks(instance.gt_labels, 3);
    ProjectionResult result =
        project_flow(assemble_system(restrict_basis(basis, masks)), instance.flow);
    CHECK(result.residual <= 1e-6 * instance.flow.vec().norm());
  }
}

TEST_CASE("translation-only motion stays in the translational sub-span") {
  RandomSceneParams params;
  params.regions = 2;
  params.motion_style = MotionStyle::kPureTranslation;
  SceneSpec spec = random_scene(5, params);
  SceneInstance instance = compose_scene(spec);

  BasisStack basis =
      normalized_basis_for(spec.camera, instance.gt_disparity, BasisKind::kTranslationOnly);
  SoftMaskStack masks = oracles::one_hot_masks(instance.gt_labels, 2);
  ProjectionResult result =
      project_flow(assemble_system(restrict_basis(basis, masks)), instance.flow);
  CHECK(result.residual <= 1e-6 * instance.flow.vec().norm());
}

TEST_CASE("rotation-only motion is disparity-independent") {
  RandomSceneParams params;
  params.regions = 2;
  params.motion_style = MotionStyle::kPureRotation;
  SceneSpec spec = random_scene(6, params);
  SceneInstance instance = compose_scene(spec);

  // project on the rotational sub-span built from a *wrong* disparity
  Rng rng(123);
  DisparityField wrong = oracles::random_disparity(rng, params.height, params.width, 0.05, 2.0);
  BasisStack basis = normalized_basis_for(spec.camera, wrong, BasisKind::kRotationOnly);
  SoftMaskStack masks = oracles::one_hot_masks(instance.gt_labels, 2);
  ProjectionResult result =
      project_flow(assemble_system(restrict_basis(basis, masks)), instance.flow);
  CHECK(result.residual <= 1e-6 * instance.flow.vec().norm());
}
