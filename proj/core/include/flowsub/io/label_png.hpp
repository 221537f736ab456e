#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "flowsub/grid.hpp"

namespace flowsub::io {

/// The fixed 256-entry palette used for every label PNG. Index 0 is black;
/// the rest walk the hue circle by the golden ratio with varied
/// saturation/value so nearby labels stay distinguishable.
const std::array<std::array<std::uint8_t, 3>, 256>& label_palette();

/// 8-bit indexed PNG with the fixed palette. Labels must lie in [0, 255].
void write_label_png(const LabelGrid& labels, const std::filesystem::path& path);

/// Reads an 8-bit indexed or grayscale PNG as labels (palette indices or gray
/// levels respectively). background_label of the result defaults to 0.
LabelGrid read_label_png(const std::filesystem::path& path);

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // rgb, row-major

  RgbImage() = default;
  RgbImage(int h, int w) : width(w), height(h), pixels(3 * static_cast<std::size_t>(h) * w, 0) {}
};

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace flowsub::io
