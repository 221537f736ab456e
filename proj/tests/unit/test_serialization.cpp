#include <doctest.h>

#include "flowsub/serialization.hpp"

using namespace flowsub;

TEST_CASE("scene spec JSON round trip") {
  RandomSceneParams params;
  params.regions = 3;
  SceneSpec spec = random_scene(12, params);
  const std::string text = scene_spec_to_json(spec);
  SceneSpec parsed = scene_spec_from_json(text);
  CHECK(scene_spec_to_json(parsed) == text);
  CHECK(parsed.camera.width == spec.camera.width);
  CHECK(parsed.regions.size() == spec.regions.size());
  REQUIRE(parsed.camera.focal.has_value());
  CHECK(parsed.camera.focal->fx == spec.camera.focal->fx);
}

TEST_CASE("scene spec with explicit labels round trips") {
  SceneSpec spec;
  spec.camera = CameraModel::centered(4, 4, Focal{4.0, 4.0});
  spec.regions.resize(2);
  spec.regions[0].shape.kind = Shape::Kind::kRest;
  spec.regions[1].shape.kind = Shape::Kind::kRest;  // ignored with explicit labels
  spec.explicit_labels = std::vector<int>(16, 0);
  (*spec.explicit_labels)[5] = 1;
  SceneSpec parsed = scene_spec_from_json(scene_spec_to_json(spec));
  REQUIRE(parsed.explicit_labels.has_value());
  CHECK((*parsed.explicit_labels)[5] == 1);
}

TEST_CASE("scene spec parse failures") {
  CHECK_THROWS_AS(scene_spec_from_json("not json"), Error);
  CHECK_THROWS_AS(scene_spec_from_json("{\"schema\": 2}"), Error);
  CHECK_THROWS_AS(scene_spec_from_json("{\"schema\": 1}"), Error);  // missing camera
}

TEST_CASE("fit config JSON: partial documents keep defaults") {
  FitConfig config = fit_config_from_json("{\"K\": 3, \"basis\": \"rotationOnly\"}");
  CHECK(config.regions == 3);
  CHECK(config.basis_kind == BasisKind::kRotationOnly);
  FitConfig defaults;
  CHECK(config.iterations == defaults.iterations);
  CHECK(config.lr_disparity == defaults.lr_disparity);
  CHECK(config.sv_threshold == defaults.sv_threshold);

  FitConfig round = fit_config_from_json(fit_config_to_json(config));
  CHECK(round.regions == config.regions);
  CHECK(round.basis_kind == config.basis_kind);
  CHECK(round.lr_logits == config.lr_logits);

  CHECK_THROWS_AS(fit_config_from_json("{\"basis\": \"mystery\"}"), Error);
}
