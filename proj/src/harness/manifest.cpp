#include "slowheat/harness/manifest.hpp"

#include <ctime>

#include "slowheat/errors.hpp"
#include "slowheat/harness/io.hpp"

namespace slowheat::harness {

nlohmann::json to_json(const RunManifest& m) {
  return nlohmann::json{{"tool_version", m.tool_version},
                        {"experiment", m.experiment},
                        {"master_seed", m.master_seed},
                        {"config_digest", m.config_digest},
                        {"started", m.started},
                        {"finished", m.finished},
                        {"outputs", m.outputs},
                        {"warnings", m.warnings},
                        {"summary", m.summary}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.tool_version = j.at("tool_version").get<std::string>();
    m.experiment = j.at("experiment").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.config_digest = j.at("config_digest").get<std::string>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    m.summary = j.at("summary");
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("manifest: ") + e.what());
  }
  return m;
}

std::string write_manifest(const RunManifest& m,
                           const std::filesystem::path& dir) {
  const std::string name = m.experiment + "_manifest.json";
  write_text_file(dir / name, to_json(m).dump(2) + "\n");
  return name;
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace slowheat::harness
