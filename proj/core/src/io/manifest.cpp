#include "flowsub/io/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "flowsub/error.hpp"

namespace flowsub::io {

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::kIoError, "cannot open " + path.string());

  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buffer[1 << 14];
  while (file.read(buffer, sizeof(buffer)) || file.gcount() > 0) {
    for (std::streamsize i = 0; i < file.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ull;
    }
    if (!file) break;
  }
  return hash;
}

std::string fnv1a64_hex(std::uint64_t hash) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["command"] = manifest.command;
  doc["argv"] = manifest.argv;
  doc["config"] = manifest.config_json.empty()
                      ? nlohmann::json(nullptr)
                      : nlohmann::json::parse(manifest.config_json);
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [file, hash] : manifest.input_hashes) inputs[file] = hash;
  doc["inputs"] = inputs;
  doc["outputs"] = manifest.outputs;
  doc["wall_seconds"] = manifest.wall_seconds;
  doc["seed"] = manifest.seed;

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

}  // namespace flowsub::io
