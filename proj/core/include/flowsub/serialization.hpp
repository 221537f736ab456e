#pragma once

#include <string>

#include "flowsub/fitter.hpp"
#include "flowsub/scene.hpp"

namespace flowsub {

/// SceneSpec wire format, versioned with a top-level `"schema": 1`.
std::string scene_spec_to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const std::string& text);

/// FitConfig as JSON; absent fields keep their defaults on parse.
std::string fit_config_to_json(const FitConfig& config);
FitConfig fit_config_from_json(const std::string& text);

}  // namespace flowsub
