#pragma once

#include "porestab/common.hpp"

#include <json.hpp>

#include <string>

namespace porestab {

std::string sha256_file(const std::string& path);
std::string sha256_string(const std::string& data);

/// Run manifest: config echo, tool version, mesh checksum, wall-clock timings,
/// verdicts/notes and a content-hashed inventory of every output file. Written
/// atomically (temp file + rename) at run end.
class ManifestBuilder {
public:
  ManifestBuilder(const nlohmann::json& config_echo, const std::string& output_dir);

  void add_timing(const std::string& name, double seconds);
  void add_note(const std::string& key, const nlohmann::json& value);
  /// Registers a file living in the output directory (path relative to it).
  void add_file(const std::string& relative_path);
  void mark_incomplete(const std::string& reason);

  void write() const; ///< writes <output_dir>/manifest.json atomically

private:
  nlohmann::json j_;
  std::string dir_;
};

} // namespace porestab
