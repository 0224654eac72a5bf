#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace wifico {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

struct RunManifest {
  std::string stage;
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::map<std::string, std::string> settings;  // effective overrides worth surfacing
  std::map<std::string, std::string> inputs;    // path -> sha256
  std::map<std::string, std::string> outputs;   // path relative to the stage dir -> sha256
  std::map<std::string, double> timings_ms;     // this stage and every predecessor
};

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest load_manifest(const std::string& path);

}  // namespace wifico
