#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace pitl::experiment {

std::string sha256_hex(std::string_view bytes);
/// Throws Error when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

/// UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

/// Per-run record. Everything except `created_at` is a function of config and seed.
struct Manifest {
  std::string command;
  std::string model;
  std::string preset;
  std::size_t order = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  nlohmann::json config;
  /// "ok" or "diverged".
  std::string status = "ok";
  std::string diagnostic;
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json settings = nlohmann::json::object();
  /// File name (relative to the manifest) -> SHA-256.
  std::map<std::string, std::string> files;
  std::string created_at;
};

nlohmann::json to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);
/// Hashes every listed file in `dir`, stamps created_at, writes dir/manifest.json.
void write_manifest(Manifest m, const std::filesystem::path& dir);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace pitl::experiment
