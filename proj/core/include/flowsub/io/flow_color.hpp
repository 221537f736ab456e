#pragma once

#include <optional>

#include "flowsub/grid.hpp"
#include "flowsub/io/label_png.hpp"

namespace flowsub::io {

/// Classic optical-flow color wheel (white at zero motion): hue encodes the
/// flow direction, saturation the magnitude normalized by max_magnitude or,
/// when absent, by the field's own maximum. Magnitudes past the normalizer
/// render dimmed; non-finite flow renders black.
RgbImage flow_to_color(const FlowGrid& flow, std::optional<double> max_magnitude = std::nullopt);

}  // namespace flowsub::io
