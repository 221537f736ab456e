#include "flowsub/io/pfm.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace flowsub::io {

namespace {

constexpr int kMaxDim = 1 << 16;

std::string next_token(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw Error(ErrorCode::kBadHeader, "truncated PFM header");
  return token;
}

std::uint32_t unpack_u32(const char* in, bool little_endian) {
  auto byte = [&](int i) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(in[little_endian ? i : 3 - i]));
  };
  return byte(0) | byte(1) << 8 | byte(2) << 16 | byte(3) << 24;
}

}  // namespace

ScalarGrid read_pfm(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::kIoError, "cannot open " + path.string());

  const std::string magic = next_token(file);
  if (magic == "PF")
    throw Error(ErrorCode::kBadHeader, "color PFM is not supported: " + path.string());
  if (magic != "Pf") throw Error(ErrorCode::kBadMagic, path.string() + " is not a PFM file");

  int width = 0, height = 0;
  double scale = 0.0;
  try {
    width = std::stoi(next_token(file));
    height = std::stoi(next_token(file));
    scale = std::stod(next_token(file));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kBadHeader, "malformed PFM header in " + path.string());
  }
  if (width <= 0 || height <= 0 || width > kMaxDim || height > kMaxDim)
    throw Error(ErrorCode::kDimensionOverflow,
                "unreasonable dims " + std::to_string(width) + "x" + std::to_string(height));
  if (scale == 0.0) throw Error(ErrorCode::kBadHeader, "PFM scale must be nonzero");
  file.get();  // the single whitespace byte ending the header

  const bool little_endian = scale < 0.0;
  std::vector<char> payload(static_cast<std::size_t>(width) * height * 4);
  if (!file.read(payload.data(), static_cast<std::streamsize>(payload.size())))
    throw Error(ErrorCode::kTruncatedFile, "PFM payload short in " + path.string());

  ScalarGrid grid(height, width);
  for (int r = 0; r < height; ++r) {
    const int source_row = height - 1 - r;  // bottom-up storage
    for (int c = 0; c < width; ++c) {
      const char* bytes = payload.data() + 4 * (static_cast<std::size_t>(source_row) * width + c);
      grid.at(r, c) = std::bit_cast<float>(unpack_u32(bytes, little_endian));
    }
  }
  return grid;
}

void write_pfm(const ScalarGrid& grid, const std::filesystem::path& path) {
  if (grid.width() <= 0 || grid.height() <= 0 || grid.width() > kMaxDim || grid.height() > kMaxDim)
    throw Error(ErrorCode::kDimensionOverflow, "grid dims not writable");

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIoError, "cannot write " + path.string());

  std::ostringstream header;
  header << "Pf\n" << grid.width() << " " << grid.height() << "\n-1.0\n";
  const std::string header_text = header.str();
  file.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));

  std::vector<char> payload(grid.size() * 4);
  std::size_t offset = 0;
  for (int r = grid.height() - 1; r >= 0; --r) {
    for (int c = 0; c < grid.width(); ++c, offset += 4) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(grid.at(r, c)));
      payload[offset] = static_cast<char>(bits & 0xff);
      payload[offset + 1] = static_cast<char>((bits >> 8) & 0xff);
      payload[offset + 2] = static_cast<char>((bits >> 16) & 0xff);
      payload[offset + 3] = static_cast<char>((bits >> 24) & 0xff);
    }
  }
  file.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!file) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

}  // namespace flowsub::io
