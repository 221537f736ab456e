#pragma once

#include <filesystem>

#include "flowsub/grid.hpp"

namespace flowsub::io {

/// Middlebury .flo: 4-byte magic "PIEH", little-endian int32 width and height,
/// then row-major interleaved (u, v) little-endian float32. Values are stored
/// as float32, so write-then-read is bit-exact for float32-representable data.
FlowGrid read_flo(const std::filesystem::path& path);
void write_flo(const FlowGrid& flow, const std::filesystem::path& path);

}  // namespace flowsub::io
