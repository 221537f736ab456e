#include "flowsub/io/flow_color.hpp"

#include <array>
#include <cmath>

namespace flowsub::io {

namespace {

// 55-entry wheel with segment lengths chosen for perceptual evenness
constexpr int kRY = 15, kYG = 6, kGC = 4, kCB = 11, kBM = 13, kMR = 6;
constexpr int kWheelSize = kRY + kYG + kGC + kCB + kBM + kMR;

std::array<std::array<double, 3>, kWheelSize> make_wheel() {
  // integer ramps, matching the classic wheel tables bit for bit
  std::array<std::array<double, 3>, kWheelSize> wheel{};
  int k = 0;
  auto entry = [](int r, int g, int b) {
    return std::array<double, 3>{double(r), double(g), double(b)};
  };
  for (int i = 0; i < kRY; ++i) wheel[k++] = entry(255, 255 * i / kRY, 0);
  for (int i = 0; i < kYG; ++i) wheel[k++] = entry(255 - 255 * i / kYG, 255, 0);
  for (int i = 0; i < kGC; ++i) wheel[k++] = entry(0, 255, 255 * i / kGC);
  for (int i = 0; i < kCB; ++i) wheel[k++] = entry(0, 255 - 255 * i / kCB, 255);
  for (int i = 0; i < kBM; ++i) wheel[k++] = entry(255 * i / kBM, 0, 255);
  for (int i = 0; i < kMR; ++i) wheel[k++] = entry(255, 0, 255 - 255 * i / kMR);
  return wheel;
}

}  // namespace

RgbImage flow_to_color(const FlowGrid& flow, std::optional<double> max_magnitude) {
  static const auto wheel = make_wheel();

  double normalizer = 0.0;
  if (max_magnitude) {
    normalizer = *max_magnitude;
  } else {
    for (int r = 0; r < flow.height(); ++r)
      for (int c = 0; c < flow.width(); ++c) {
        const Vec2 value = flow.uv(r, c);
        if (!std::isfinite(value.u) || !std::isfinite(value.v)) continue;
        normalizer = std::max(normalizer, std::hypot(value.u, value.v));
      }
  }
  if (!(normalizer > 0.0)) normalizer = 1.0;  // all-zero field stays white

  RgbImage image(flow.height(), flow.width());
  for (int r = 0; r < flow.height(); ++r) {
    for (int c = 0; c < flow.width(); ++c) {
      const Vec2 value = flow.uv(r, c);
      std::uint8_t* out = image.pixels.data() + 3 * (static_cast<std::size_t>(r) * flow.width() + c);
      if (!std::isfinite(value.u) || !std::isfinite(value.v)) {
        out[0] = out[1] = out[2] = 0;
        continue;
      }
      const double fu = value.u / normalizer, fv = value.v / normalizer;
      const double radius = std::hypot(fu, fv);
      const double angle = std::atan2(-fv, -fu) / M_PI;           // in [-1, 1]
      const double position = (angle + 1.0) / 2.0 * (kWheelSize - 1);
      const int k0 = static_cast<int>(position);
      const int k1 = (k0 + 1) % kWheelSize;
      const double blend = position - k0;
      for (int ch = 0; ch < 3; ++ch) {
        double color = ((1.0 - blend) * wheel[k0][ch] + blend * wheel[k1][ch]) / 255.0;
        if (radius <= 1.0)
          color = 1.0 - radius * (1.0 - color);  // desaturate toward white at zero
        else
          color *= 0.75;                          // out of range: dim
        out[ch] = static_cast<std::uint8_t>(std::lround(255.0 * color));
      }
    }
  }
  return image;
}

}  // namespace flowsub::io
