#include "pitl/experiment/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>

#include "pitl/errors.hpp"

namespace pitl::experiment {

namespace {

struct DigestCtx {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

  DigestCtx() {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx.get(), data, n) != 1) throw Error("sha256 update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) throw Error("sha256 final failed");
    static const char* const kHex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 0xf]);
    }
    return out;
  }
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  DigestCtx d;
  d.update(bytes.data(), bytes.size());
  return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  DigestCtx d;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return d.hex();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json to_json(const Manifest& m) {
  return {{"format", "pitl.manifest"}, {"version", 1},          {"command", m.command},
          {"model", m.model},          {"preset", m.preset},    {"order", m.order},
          {"seed", m.seed},            {"config_hash", m.config_hash}, {"config", m.config},
          {"status", m.status},        {"diagnostic", m.diagnostic},   {"metrics", m.metrics},
          {"settings", m.settings},    {"files", m.files},      {"created_at", m.created_at}};
}

Manifest manifest_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "pitl.manifest") throw ParseError("not a run manifest");
    Manifest m;
    m.command = j.at("command").get<std::string>();
    m.model = j.at("model").get<std::string>();
    m.preset = j.value("preset", std::string());
    m.order = j.value("order", std::size_t{0});
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config = j.value("config", nlohmann::json::object());
    m.status = j.at("status").get<std::string>();
    m.diagnostic = j.value("diagnostic", std::string());
    m.metrics = j.at("metrics");
    m.settings = j.value("settings", nlohmann::json::object());
    m.files = j.value("files", std::map<std::string, std::string>{});
    m.created_at = j.value("created_at", std::string());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
}

void write_manifest(Manifest m, const std::filesystem::path& dir) {
  for (auto& [name, hash] : m.files) hash = sha256_file(dir / name);
  m.created_at = utc_timestamp();
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << to_json(m).dump(2) << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest " + path.string());
  try {
    return manifest_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace pitl::experiment
