#include "csrslab/manifest.hpp"

#include <array>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "csrslab/errors.hpp"

#ifndef CSRSLAB_VERSION
#define CSRSLAB_VERSION "0.0.0"
#endif

namespace csrslab {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256 init failed");
    }
  }
  void update(const void* data, std::size_t size) { EVP_DigestUpdate(ctx_.get(), data, size); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 0xf]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot read " + file.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string tool_version() { return CSRSLAB_VERSION; }

nlohmann::json RunManifest::to_json() const {
  auto digests = [](const std::vector<FileDigest>& files) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : files) arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return arr;
  };
  return {{"command", command},     {"args", args},
          {"config_hash", config_hash}, {"seed", seed},
          {"tool_version", tool_version}, {"timestamp", timestamp},
          {"inputs", digests(inputs)}, {"outputs", digests(outputs)},
          {"config", config}};
}

RunManifest RunManifest::from_json(const nlohmann::json& doc) {
  RunManifest m;
  m.command = doc.at("command").get<std::string>();
  m.args = doc.at("args").get<std::vector<std::string>>();
  m.config_hash = doc.at("config_hash").get<std::string>();
  m.seed = doc.at("seed").get<std::uint64_t>();
  m.tool_version = doc.at("tool_version").get<std::string>();
  m.timestamp = doc.value("timestamp", std::string());
  for (const auto& f : doc.at("inputs")) m.inputs.push_back({f.at("path"), f.at("sha256")});
  for (const auto& f : doc.at("outputs")) m.outputs.push_back({f.at("path"), f.at("sha256")});
  m.config = doc.at("config");
  return m;
}

RunManifest RunManifest::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open manifest " + file.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("manifest " + file.string() + ": " + e.what());
  }
}

void RunManifest::write(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write manifest " + file.string());
  out << to_json().dump(2) << '\n';
}

}  // namespace csrslab
