#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace slowheat::harness {

struct RunManifest {
  std::string tool_version;
  std::string experiment;
  std::uint64_t master_seed = 0;
  std::string config_digest;  // hex FNV-1a over the canonical config dump
  std::string started;        // ISO 8601 UTC
  std::string finished;
  std::vector<std::string> outputs;  // file names relative to the run dir
  std::vector<std::string> warnings;
  nlohmann::json summary;  // experiment-specific results block
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

// Writes <experiment>_manifest.json into dir and returns the file name.
std::string write_manifest(const RunManifest& m,
                           const std::filesystem::path& dir);

std::string timestamp_utc();

}  // namespace slowheat::harness
