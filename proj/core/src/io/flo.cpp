#include "flowsub/io/flo.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace flowsub::io {

namespace {

constexpr char kMagic[4] = {'P', 'I', 'E', 'H'};  // the float 202021.25
constexpr std::int32_t kMaxDim = 1 << 16;

void pack_u32_le(std::uint32_t value, char* out) {
  out[0] = static_cast<char>(value & 0xff);
  out[1] = static_cast<char>((value >> 8) & 0xff);
  out[2] = static_cast<char>((value >> 16) & 0xff);
  out[3] = static_cast<char>((value >> 24) & 0xff);
}

std::uint32_t unpack_u32_le(const char* in) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(in[0])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(in[1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(in[2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(in[3])) << 24;
}

}  // namespace

FlowGrid read_flo(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::kIoError, "cannot open " + path.string());

  char magic[4];
  if (!file.read(magic, 4)) throw Error(ErrorCode::kTruncatedFile, "missing magic in " + path.string());
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw Error(ErrorCode::kBadMagic, path.string() + " is not a .flo file");

  char dims[8];
  if (!file.read(dims, 8)) throw Error(ErrorCode::kTruncatedFile, "missing dims in " + path.string());
  const auto width = static_cast<std::int32_t>(unpack_u32_le(dims));
  const auto height = static_cast<std::int32_t>(unpack_u32_le(dims + 4));
  if (width <= 0 || height <= 0 || width > kMaxDim || height > kMaxDim)
    throw Error(ErrorCode::kDimensionOverflow,
                "unreasonable dims " + std::to_string(width) + "x" + std::to_string(height));

  const std::size_t count = 2 * static_cast<std::size_t>(width) * height;
  std::vector<char> payload(count * 4);
  if (!file.read(payload.data(), static_cast<std::streamsize>(payload.size())))
    throw Error(ErrorCode::kTruncatedFile, "flow payload short in " + path.string());

  FlowGrid flow(height, width);
  for (std::size_t i = 0; i < count; ++i)
    flow.data()[i] = std::bit_cast<float>(unpack_u32_le(payload.data() + 4 * i));
  return flow;
}

void write_flo(const FlowGrid& flow, const std::filesystem::path& path) {
  if (flow.width() <= 0 || flow.height() <= 0 || flow.width() > kMaxDim || flow.height() > kMaxDim)
    throw Error(ErrorCode::kDimensionOverflow, "flow dims not writable");

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIoError, "cannot write " + path.string());

  file.write(kMagic, 4);
  char dims[8];
  pack_u32_le(static_cast<std::uint32_t>(flow.width()), dims);
  pack_u32_le(static_cast<std::uint32_t>(flow.height()), dims + 4);
  file.write(dims, 8);

  std::vector<char> payload(flow.flat_size() * 4);
  for (std::size_t i = 0; i < flow.flat_size(); ++i)
    pack_u32_le(std::bit_cast<std::uint32_t>(static_cast<float>(flow.data()[i])),
                payload.data() + 4 * i);
  file.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!file) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

}  // namespace flowsub::io
