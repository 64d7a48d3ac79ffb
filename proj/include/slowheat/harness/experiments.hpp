#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>

#include "slowheat/harness/manifest.hpp"

namespace slowheat::harness {

// Global options resolved from CLI flags and the environment before any
// config is read.
struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::uint64_t master_seed = 0x5eed5eedULL;
  bool seed_overridden = false;  // --seed beats the config's own seed
  int threads = 1;               // accepted for config stability; replicas run serially
};

// Validate and dispatch one experiment config.  Writes CSV/JSON/SVG artifacts
// plus the run manifest into opts.out_dir and returns the manifest.  Unknown
// keys anywhere in the config are rejected with the failing parameter path.
RunManifest run_experiment(const nlohmann::json& config, const RunOptions& opts);

// Assemble report.md from every *_manifest.json under dir.  Missing upstream
// artifacts are listed and the report is still emitted; an empty directory is
// a validation error.
RunManifest run_report(const std::filesystem::path& dir, const RunOptions& opts);

}  // namespace slowheat::harness
