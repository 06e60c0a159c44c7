#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ctfdct/beta.hpp"

namespace ctfdct {

struct FeatureRecord {
  BetaVector features;
  std::string label;
};

enum class FeatureFormat { Csv, JsonLines };

// Header: source_id,label,block_count,beta_1,...,beta_63. Values use %.17g.
void write_features_csv(std::ostream& out, std::span<const FeatureRecord> records);
void write_features_jsonl(std::ostream& out, std::span<const FeatureRecord> records);
void write_features(const std::filesystem::path& path, std::span<const FeatureRecord> records,
                    FeatureFormat format = FeatureFormat::Csv);

std::vector<FeatureRecord> read_features_csv(std::istream& in);
std::vector<FeatureRecord> read_features_jsonl(std::istream& in);
// Format chosen by extension: .jsonl / .ndjson are JSON lines, anything else CSV.
std::vector<FeatureRecord> read_features(const std::filesystem::path& path);

FeatureFormat format_for_path(const std::filesystem::path& path);

}  // namespace ctfdct
