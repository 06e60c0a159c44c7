#include "ctfdct/manifest.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "ctfdct/error.hpp"

namespace ctfdct {

SplitTag parse_split(std::string_view name) {
  if (name == "train") return SplitTag::Train;
  if (name == "test") return SplitTag::Test;
  if (name == "unassigned" || name.empty()) return SplitTag::Unassigned;
  throw Error(ErrorCode::Format, "unknown split: " + std::string(name));
}

std::string_view to_string(SplitTag split) {
  switch (split) {
    case SplitTag::Train: return "train";
    case SplitTag::Test: return "test";
    case SplitTag::Unassigned: return "unassigned";
  }
  return "unassigned";
}

std::filesystem::path DatasetManifest::resolve(const ManifestEntry& entry) const {
  const std::filesystem::path p(entry.path);
  return p.is_absolute() ? p : base_dir / p;
}

void DatasetManifest::validate() {
  std::set<std::string> paths;
  for (const auto& e : entries) {
    if (!paths.insert(e.path).second) throw Error(ErrorCode::Format, "duplicate manifest path: " + e.path);
  }
  if (labels.empty()) {
    for (const auto& e : entries) {
      if (std::find(labels.begin(), labels.end(), e.label) == labels.end()) labels.push_back(e.label);
    }
    return;
  }
  for (const auto& e : entries) {
    if (std::find(labels.begin(), labels.end(), e.label) == labels.end()) {
      throw Error(ErrorCode::Label, "manifest entry " + e.path + " has undeclared label '" + e.label + "'");
    }
  }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open manifest " + path.string());
  DatasetManifest m;
  try {
    const auto j = nlohmann::json::parse(in);
    m.name = j.value("name", "");
    m.created_at = j.value("created_at", "");
    m.labels = j.value("labels", std::vector<std::string>{});
    for (const auto& e : j.at("entries")) {
      m.entries.push_back({e.at("path").get<std::string>(), e.at("label").get<std::string>(),
                           parse_split(e.value("split", "unassigned"))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
  m.base_dir = path.parent_path();
  m.validate();
  return m;
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  nlohmann::ordered_json j;
  j["name"] = manifest.name;
  j["created_at"] = manifest.created_at;
  j["labels"] = manifest.labels;
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : manifest.entries) {
    nlohmann::ordered_json rec;
    rec["path"] = e.path;
    rec["label"] = e.label;
    rec["split"] = to_string(e.split);
    entries.push_back(std::move(rec));
  }
  j["entries"] = std::move(entries);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

std::string manifest_timestamp() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace ctfdct
