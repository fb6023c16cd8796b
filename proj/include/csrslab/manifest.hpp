#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace csrslab {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& file);

/// ISO-8601 UTC time. Honours SOURCE_DATE_EPOCH so pinned runs are
/// byte-reproducible.
std::string utc_timestamp();

std::string tool_version();

struct FileDigest {
  std::string path;  // relative to the output directory for outputs
  std::string sha256;
};

/// Record of one command invocation; everything except `timestamp`
/// determines the outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string timestamp;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  nlohmann::json config;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& doc);
  static RunManifest load(const std::filesystem::path& file);
  void write(const std::filesystem::path& file) const;
};

}  // namespace csrslab
