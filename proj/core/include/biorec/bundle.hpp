#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "biorec/pipeline.hpp"

namespace biorec {

/// Saved model: a trained pipeline plus the config text it came from.
///
/// On disk: 8-byte magic "BIORECMB", u32 format version, u64 payload size,
/// payload, u32 CRC-32 of the payload. All integers and doubles are
/// little-endian; doubles are stored bit-exact.
struct ModelBundle {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::uint32_t version = kFormatVersion;
  std::string config_yaml;
  TrainedPipeline pipeline;
};

std::string encode_bundle(const ModelBundle& bundle);
/// Throws FormatError on bad magic, version mismatch or checksum failure.
ModelBundle decode_bundle(const std::string& bytes);

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace biorec
