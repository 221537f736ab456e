#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace flowsub::io {

/// Reproducibility record emitted by every CLI run: the exact invocation,
/// a config snapshot, content fingerprints of the inputs, the produced
/// outputs, wall-clock, and the seed. Re-running the recorded command on the
/// same inputs reproduces the outputs bit-for-bit.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config_json;  // serialized snapshot of the effective config
  std::vector<std::pair<std::string, std::string>> input_hashes;  // path -> fingerprint
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

/// FNV-1a 64-bit over the file bytes; a content fingerprint, not a
/// cryptographic hash.
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string fnv1a64_hex(std::uint64_t hash);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace flowsub::io
