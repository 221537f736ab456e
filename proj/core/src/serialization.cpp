#include "flowsub/serialization.hpp"

#include <json.hpp>

namespace flowsub {

namespace {

using nlohmann::json;

json shape_to_json(const Shape& shape) {
  switch (shape.kind) {
    case Shape::Kind::kRectangle:
      return {{"type", "rectangle"}, {"x0", shape.x0}, {"y0", shape.y0}, {"x1", shape.x1}, {"y1", shape.y1}};
    case Shape::Kind::kDisk:
      return {{"type", "disk"}, {"cx", shape.cx}, {"cy", shape.cy}, {"radius", shape.radius}};
    case Shape::Kind::kHalfPlane:
      return {{"type", "half_plane"}, {"a", shape.a}, {"b", shape.b}, {"c", shape.c}};
    case Shape::Kind::kRest:
      return {{"type", "rest"}};
  }
  throw Error(ErrorCode::kBadInput, "unknown shape kind");
}

Shape shape_from_json(const json& doc) {
  const std::string type = doc.at("type").get<std::string>();
  Shape shape;
  if (type == "rectangle") {
    shape.kind = Shape::Kind::kRectangle;
    shape.x0 = doc.at("x0").get<double>();
    shape.y0 = doc.at("y0").get<double>();
    shape.x1 = doc.at("x1").get<double>();
    shape.y1 = doc.at("y1").get<double>();
  } else if (type == "disk") {
    shape.kind = Shape::Kind::kDisk;
    shape.cx = doc.at("cx").get<double>();
    shape.cy = doc.at("cy").get<double>();
    shape.radius = doc.at("radius").get<double>();
  } else if (type == "half_plane") {
    shape.kind = Shape::Kind::kHalfPlane;
    shape.a = doc.at("a").get<double>();
    shape.b = doc.at("b").get<double>();
    shape.c = doc.at("c").get<double>();
  } else if (type == "rest") {
    shape.kind = Shape::Kind::kRest;
  } else {
    throw Error(ErrorCode::kBadInput, "unknown shape type '" + type + "'");
  }
  return shape;
}

json depth_to_json(const DepthModel& model) {
  switch (model.kind) {
    case DepthModel::Kind::kConstant:
      return {{"type", "constant"}, {"z", model.z}};
    case DepthModel::Kind::kPlanarRamp:
      return {{"type", "planar_ramp"}, {"z", model.z}, {"slope_u", model.slope_u}, {"slope_v", model.slope_v}};
    case DepthModel::Kind::kFrontoOffset:
      return {{"type", "fronto_offset"}, {"offset", model.offset}};
  }
  throw Error(ErrorCode::kBadInput, "unknown depth model kind");
}

DepthModel depth_from_json(const json& doc) {
  const std::string type = doc.at("type").get<std::string>();
  DepthModel model;
  if (type == "constant") {
    model.kind = DepthModel::Kind::kConstant;
    model.z = doc.at("z").get<double>();
  } else if (type == "planar_ramp") {
    model.kind = DepthModel::Kind::kPlanarRamp;
    model.z = doc.at("z").get<double>();
    model.slope_u = doc.at("slope_u").get<double>();
    model.slope_v = doc.at("slope_v").get<double>();
  } else if (type == "fronto_offset") {
    model.kind = DepthModel::Kind::kFrontoOffset;
    model.offset = doc.at("offset").get<double>();
  } else {
    throw Error(ErrorCode::kBadInput, "unknown depth model type '" + type + "'");
  }
  return model;
}

}  // namespace

std::string scene_spec_to_json(const SceneSpec& spec) {
  json doc;
  doc["schema"] = 1;
  doc["seed"] = spec.seed;
  doc["base_depth"] = spec.base_depth;
  doc["camera"] = {{"width", spec.camera.width},
                   {"height", spec.camera.height},
                   {"cx", spec.camera.cx},
                   {"cy", spec.camera.cy}};
  if (spec.camera.focal) {
    doc["camera"]["fx"] = spec.camera.focal->fx;
    doc["camera"]["fy"] = spec.camera.focal->fy;
  }
  doc["regions"] = json::array();
  for (const RegionSpec& region : spec.regions) {
    doc["regions"].push_back({{"shape", shape_to_json(region.shape)},
                              {"depth", depth_to_json(region.depth)},
                              {"motion",
                               {{"omega", region.motion.omega}, {"vel", region.motion.vel}}}});
  }
  if (spec.explicit_labels) doc["labels"] = *spec.explicit_labels;
  return doc.dump(2);
}

SceneSpec scene_spec_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadInput, std::string("scene spec is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("schema").get<int>() != 1)
      throw Error(ErrorCode::kBadInput, "unsupported scene spec schema version");

    SceneSpec spec;
    spec.seed = doc.value("seed", 0ull);
    spec.base_depth = doc.value("base_depth", 5.0);

    const json& camera = doc.at("camera");
    spec.camera.width = camera.at("width").get<int>();
    spec.camera.height = camera.at("height").get<int>();
    spec.camera.cx = camera.at("cx").get<double>();
    spec.camera.cy = camera.at("cy").get<double>();
    if (camera.contains("fx") || camera.contains("fy"))
      spec.camera.focal = Focal{camera.at("fx").get<double>(), camera.at("fy").get<double>()};

    for (const json& entry : doc.at("regions")) {
      RegionSpec region;
      region.shape = shape_from_json(entry.at("shape"));
      region.depth = depth_from_json(entry.at("depth"));
      const json& motion = entry.at("motion");
      for (int i = 0; i < 3; ++i) {
        region.motion.omega[i] = motion.at("omega").at(i).get<double>();
        region.motion.vel[i] = motion.at("vel").at(i).get<double>();
      }
      spec.regions.push_back(region);
    }
    if (doc.contains("labels")) spec.explicit_labels = doc.at("labels").get<std::vector<int>>();
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadInput, std::string("scene spec is missing fields: ") + e.what());
  }
}

std::string fit_config_to_json(const FitConfig& config) {
  json doc;
  doc["K"] = config.regions;
  doc["iterations"] = config.iterations;
  doc["lr_disparity"] = config.lr_disparity;
  doc["lr_logits"] = config.lr_logits;
  doc["sv_threshold"] = config.sv_threshold;
  doc["basis"] = to_string(config.basis_kind);
  doc["seed"] = config.seed;
  doc["tolerance"] = config.tolerance;
  doc["patience"] = config.patience;
  doc["damping"] = config.damping;
  doc["tv_weight"] = config.tv_weight;
  doc["sharpness_weight"] = config.sharpness_weight;
  doc["init_disparity"] = config.init_disparity;
  doc["init_logit_scale"] = config.init_logit_scale;
  return doc.dump(2);
}

FitConfig fit_config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadInput, std::string("fit config is not valid JSON: ") + e.what());
  }
  FitConfig config;
  config.regions = doc.value("K", config.regions);
  config.iterations = doc.value("iterations", config.iterations);
  config.lr_disparity = doc.value("lr_disparity", config.lr_disparity);
  config.lr_logits = doc.value("lr_logits", config.lr_logits);
  config.sv_threshold = doc.value("sv_threshold", config.sv_threshold);
  if (doc.contains("basis")) config.basis_kind = basis_kind_from_string(doc.at("basis").get<std::string>());
  config.seed = doc.value("seed", config.seed);
  config.tolerance = doc.value("tolerance", config.tolerance);
  config.patience = doc.value("patience", config.patience);
  config.damping = doc.value("damping", config.damping);
  config.tv_weight = doc.value("tv_weight", config.tv_weight);
  config.sharpness_weight = doc.value("sharpness_weight", config.sharpness_weight);
  config.init_disparity = doc.value("init_disparity", config.init_disparity);
  config.init_logit_scale = doc.value("init_logit_scale", config.init_logit_scale);
  return config;
}

}  // namespace flowsub
