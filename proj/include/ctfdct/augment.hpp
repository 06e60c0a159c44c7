#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ctfdct/attacks.hpp"
#include "ctfdct/manifest.hpp"

namespace ctfdct {

struct ProvenanceRecord {
  std::string original;
  std::string output;
  std::string kind;
  std::string parameter;
  std::uint64_t seed = 0;
};

struct ItemError {
  std::string path;
  std::string message;
};

struct AugmentResult {
  DatasetManifest manifest;  // originals followed by attacked variants
  std::vector<ProvenanceRecord> provenance;
  std::vector<ItemError> errors;
};

// Writes every (image, spec) variant as PNG into out_dir. Item i attacked by
// spec s uses seed derive_seed(s.seed, i). Unreadable entries are reported in
// errors and the rest still run. With no specs the manifest comes back as is.
AugmentResult augment_dataset(const DatasetManifest& manifest, std::span<const AttackSpec> specs,
                              const std::filesystem::path& out_dir, int jobs = 1);

// JSON lines: {original, output, kind, parameter, seed}.
void write_provenance(const std::filesystem::path& path, std::span<const ProvenanceRecord> records);

}  // namespace ctfdct
