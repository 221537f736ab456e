#pragma once

#include <filesystem>

#include "flowsub/grid.hpp"

namespace flowsub::io {

/// Grayscale PFM ("Pf"): text header `Pf\n<width> <height>\n<scale>\n`, then
/// bottom-up rows of float32. A negative scale marks little-endian payloads;
/// the scale magnitude is ignored on read. Writes use scale -1.0.
ScalarGrid read_pfm(const std::filesystem::path& path);
void write_pfm(const ScalarGrid& grid, const std::filesystem::path& path);

}  // namespace flowsub::io
