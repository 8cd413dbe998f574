#include "cvo/harness/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "json.hpp"

namespace cvo::harness {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return sha256_hex(ss.str());
}

FileEntry describe_file(const fs::path& root, const fs::path& file) {
  FileEntry e;
  const fs::path rel = fs::relative(file, root);
  const bool inside = !rel.empty() && *rel.begin() != "..";
  e.path = inside ? rel.generic_string() : fs::absolute(file).generic_string();
  e.bytes = fs::file_size(file);
  e.sha256 = sha256_file(file);
  return e;
}

std::vector<FileEntry> inventory(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name == kManifestName || name == kPartialManifestName || name.ends_with(".tmp")) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<FileEntry> out;
  for (const auto& f : files) out.push_back(describe_file(root, f));
  return out;
}

void write_manifest(const fs::path& root, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["status"] = m.status;
  if (!m.error.empty()) j["error"] = m.error;
  j["tool_version"] = m.tool_version;
  j["config_hash"] = m.config_hash;
  j["config"] = m.config_text;
  j["seeds"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.seeds) j["seeds"][k] = v;
  j["stage_seconds"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.stage_seconds) j["stage_seconds"][k] = v;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& f : m.files)
    j["files"].push_back({{"path", f.path}, {"bytes", f.bytes}, {"sha256", f.sha256}});

  const fs::path target = root / (m.status == "complete" ? kManifestName : kPartialManifestName);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << j.dump(2) << "\n";
  }
  fs::rename(tmp, target);
}

RunManifest read_manifest(const fs::path& file) {
  std::ifstream f(file);
  if (!f) throw std::runtime_error("cannot read " + file.string());
  const auto j = nlohmann::ordered_json::parse(f);
  RunManifest m;
  m.status = j.at("status").get<std::string>();
  if (j.contains("error")) m.error = j.at("error").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.config_text = j.at("config").get<std::string>();
  for (const auto& [k, v] : j.at("seeds").items()) m.seeds.emplace_back(k, v.get<std::uint64_t>());
  for (const auto& [k, v] : j.at("stage_seconds").items())
    m.stage_seconds.emplace_back(k, v.get<double>());
  for (const auto& e : j.at("files"))
    m.files.push_back({e.at("path").get<std::string>(), e.at("bytes").get<std::uint64_t>(),
                       e.at("sha256").get<std::string>()});
  return m;
}

std::vector<std::string> verify_manifest(const fs::path& root) {
  const RunManifest m = read_manifest(root / kManifestName);
  std::vector<std::string> problems;
  for (const auto& e : m.files) {
    const fs::path p = fs::path(e.path).is_absolute() ? fs::path(e.path) : root / e.path;
    if (!fs::exists(p)) {
      problems.push_back("missing: " + e.path);
      continue;
    }
    if (fs::file_size(p) != e.bytes || sha256_file(p) != e.sha256)
      problems.push_back("checksum mismatch: " + e.path);
  }
  return problems;
}

}  // namespace cvo::harness
