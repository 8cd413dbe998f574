#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace cvo::harness {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct FileEntry {
  std::string path;  // relative to the run directory, or absolute when outside it
  std::uint64_t bytes = 0;
  std::string sha256;
};

struct RunManifest {
  std::string status = "complete";  // or "partial"
  std::string error;
  std::string config_hash;
  std::string config_text;
  std::string tool_version;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<std::pair<std::string, double>> stage_seconds;
  std::vector<FileEntry> files;
};

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kPartialManifestName = "manifest.partial.json";

// Every regular file under `root` (recursively, sorted) except manifests.
std::vector<FileEntry> inventory(const std::filesystem::path& root);
FileEntry describe_file(const std::filesystem::path& root, const std::filesystem::path& file);

// Written to a temporary name and renamed into place. A manifest whose
// status is "partial" goes to kPartialManifestName instead.
void write_manifest(const std::filesystem::path& root, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& file);

// Returns one message per missing or mismatching file; empty when intact.
std::vector<std::string> verify_manifest(const std::filesystem::path& root);

}  // namespace cvo::harness
