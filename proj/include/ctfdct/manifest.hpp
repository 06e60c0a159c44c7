#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ctfdct {

enum class SplitTag { Train, Test, Unassigned };

SplitTag parse_split(std::string_view name);
std::string_view to_string(SplitTag split);

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory unless absolute
  std::string label;
  SplitTag split = SplitTag::Unassigned;
};

// Explicit dataset listing: which files, which labels, which split.
struct DatasetManifest {
  std::string name;
  std::string created_at;
  std::vector<std::string> labels;
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;  // not serialized

  std::filesystem::path resolve(const ManifestEntry& entry) const;
  // Unique paths; every entry label declared (labels are derived when empty).
  void validate();
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

// UTC timestamp; honours SOURCE_DATE_EPOCH for reproducible manifests.
std::string manifest_timestamp();

}  // namespace ctfdct
