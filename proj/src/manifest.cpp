#include "porestab/manifest.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace porestab {

namespace fs = std::filesystem;

namespace {

class Sha256 {
public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_) throw NumericalError("sha256: EVP context allocation failed");
    EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr);
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  void update(const char* data, size_t len) { EVP_DigestUpdate(ctx_, data, len); }
  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, digest, &len);
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
      char b[3];
      std::snprintf(b, sizeof(b), "%02x", digest[i]);
      out += b;
    }
    return out;
  }

private:
  EVP_MD_CTX* ctx_;
};

} // namespace

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("sha256_file: cannot open '" + path + "'");
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h.update(buf, static_cast<size_t>(in.gcount()));
  }
  return h.hex();
}

std::string sha256_string(const std::string& data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

ManifestBuilder::ManifestBuilder(const nlohmann::json& config_echo, const std::string& output_dir)
    : dir_(output_dir) {
  j_["tool"] = "porestab";
  j_["version"] = kToolVersion;
  j_["config"] = config_echo;
  j_["timings_seconds"] = nlohmann::json::object();
  j_["files"] = nlohmann::json::array();
  j_["complete"] = true;
}

void ManifestBuilder::add_timing(const std::string& name, double seconds) {
  j_["timings_seconds"][name] = seconds;
}

void ManifestBuilder::add_note(const std::string& key, const nlohmann::json& value) {
  j_[key] = value;
}

void ManifestBuilder::add_file(const std::string& relative_path) {
  const fs::path full = fs::path(dir_) / relative_path;
  nlohmann::json f;
  f["path"] = relative_path;
  f["bytes"] = static_cast<std::uint64_t>(fs::file_size(full));
  f["sha256"] = sha256_file(full.string());
  j_["files"].push_back(std::move(f));
}

void ManifestBuilder::mark_incomplete(const std::string& reason) {
  j_["complete"] = false;
  j_["incomplete_reason"] = reason;
}

void ManifestBuilder::write() const {
  const fs::path target = fs::path(dir_) / "manifest.json";
  const fs::path tmp = fs::path(dir_) / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + tmp.string() + "' for writing");
    out << j_.dump(2) << "\n";
  }
  fs::rename(tmp, target);
}

} // namespace porestab
