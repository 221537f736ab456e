#include "flowsub/io/label_png.hpp"

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

#include <png.h>

namespace flowsub::io {

namespace {

std::array<std::uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = v - c;
  auto byte = [&](double value) { return static_cast<std::uint8_t>(std::lround(255.0 * (value + m))); };
  return {byte(r), byte(g), byte(b)};
}

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

const std::array<std::array<std::uint8_t, 3>, 256>& label_palette() {
  static const auto palette = [] {
    std::array<std::array<std::uint8_t, 3>, 256> table{};
    table[0] = {0, 0, 0};
    for (int i = 1; i < 256; ++i) {
      const double hue = std::fmod(i * 0.61803398874989485, 1.0);
      const double saturation = 0.55 + 0.15 * (i % 4);
      const double value = 0.95 - 0.12 * ((i / 4) % 3);
      table[i] = hsv_to_rgb(hue, saturation, value);
    }
    return table;
  }();
  return palette;
}

void write_label_png(const LabelGrid& labels, const std::filesystem::path& path) {
  if (labels.width <= 0 || labels.height <= 0)
    throw Error(ErrorCode::kDimensionOverflow, "label grid dims not writable");
  for (int label : labels.labels)
    if (label < 0 || label > 255)
      throw Error(ErrorCode::kBadInput, "label outside the 8-bit palette range");

  FileHandle file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw Error(ErrorCode::kIoError, "cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "libpng write failed for " + path.string());
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, labels.width, labels.height, 8, PNG_COLOR_TYPE_PALETTE,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);

  std::array<png_color, 256> palette;
  const auto& table = label_palette();
  for (int i = 0; i < 256; ++i)
    palette[i] = {table[i][0], table[i][1], table[i][2]};
  png_set_PLTE(png, info, palette.data(), 256);
  png_write_info(png, info);

  std::vector<png_byte> row(labels.width);
  for (int r = 0; r < labels.height; ++r) {
    for (int c = 0; c < labels.width; ++c) row[c] = static_cast<png_byte>(labels.at(r, c));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

LabelGrid read_label_png(const std::filesystem::path& path) {
  FileHandle file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw Error(ErrorCode::kIoError, "cannot open " + path.string());

  png_byte header[8];
  if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
    throw Error(ErrorCode::kBadMagic, path.string() + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIoError, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kBadHeader, "libpng read failed for " + path.string());
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (color_type != PNG_COLOR_TYPE_PALETTE && color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kBadHeader, "label PNG must be indexed or grayscale");
  }
  if (bit_depth < 8) png_set_packing(png);
  if (bit_depth == 16) png_set_strip_16(png);
  png_read_update_info(png, info);

  LabelGrid labels(static_cast<int>(height), static_cast<int>(width));
  std::vector<png_byte> row(png_get_rowbytes(png, info));
  for (png_uint_32 r = 0; r < height; ++r) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 c = 0; c < width; ++c) labels.at(static_cast<int>(r), static_cast<int>(c)) = row[c];
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return labels;
}

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
  if (image.width <= 0 || image.height <= 0)
    throw Error(ErrorCode::kDimensionOverflow, "image dims not writable");

  FileHandle file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw Error(ErrorCode::kIoError, "cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "libpng write failed for " + path.string());
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < image.height; ++r)
    png_write_row(png, const_cast<png_bytep>(image.pixels.data() + 3 * static_cast<std::size_t>(r) * image.width));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace flowsub::io
