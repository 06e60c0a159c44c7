#include "ctfdct/augment.hpp"

#include <cstdio>
#include <fstream>
#include <optional>

#include <nlohmann/json.hpp>

#include "ctfdct/error.hpp"
#include "ctfdct/parallel.hpp"
#include "ctfdct/rng.hpp"

namespace fs = std::filesystem;

namespace ctfdct {

namespace {

struct ItemOutput {
  std::vector<ManifestEntry> entries;
  std::vector<ProvenanceRecord> provenance;
  std::optional<ItemError> error;
};

std::string output_name(std::size_t index, const ManifestEntry& entry, const AttackSpec& spec) {
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%05zu_", index);
  return prefix + fs::path(entry.path).stem().string() + "__" + spec.tag() + ".png";
}

}  // namespace

AugmentResult augment_dataset(const DatasetManifest& manifest, std::span<const AttackSpec> specs,
                              const fs::path& out_dir, int jobs) {
  AugmentResult result;
  if (specs.empty()) {
    result.manifest = manifest;
    return result;
  }
  for (const auto& s : specs) s.validate();
  fs::create_directories(out_dir);
  const fs::path out_abs = fs::absolute(out_dir);

  result.manifest.name = manifest.name + "+attacks";
  result.manifest.created_at = manifest_timestamp();
  result.manifest.labels = manifest.labels;
  result.manifest.base_dir = out_dir;
  for (const auto& e : manifest.entries) {
    const auto rel = fs::absolute(manifest.resolve(e)).lexically_relative(out_abs);
    result.manifest.entries.push_back({rel.generic_string(), e.label, e.split});
  }

  std::vector<ItemOutput> items(manifest.entries.size());
  parallel_for(items.size(), jobs, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    const auto source = manifest.resolve(entry);
    RgbImage img;
    try {
      img = decode_rgb(source);
    } catch (const Error& e) {
      items[i].error = ItemError{entry.path, e.what()};
      return;
    }
    for (const auto& spec : specs) {
      AttackSpec item_spec = spec;
      item_spec.seed = derive_seed(spec.seed, i);
      const auto name = output_name(i, entry, spec);
      try {
        write_png(out_dir / name, apply_attack(img, item_spec));
      } catch (const Error& e) {
        items[i].error = ItemError{entry.path, spec.to_string() + ": " + e.what()};
        return;
      }
      items[i].entries.push_back({name, entry.label, SplitTag::Unassigned});
      items[i].provenance.push_back(
          {entry.path, name, std::string(to_string(spec.kind)), spec.parameter_string(), item_spec.seed});
    }
  });

  for (auto& item : items) {
    if (item.error) result.errors.push_back(*item.error);
    for (auto& e : item.entries) result.manifest.entries.push_back(std::move(e));
    for (auto& p : item.provenance) result.provenance.push_back(std::move(p));
  }
  return result;
}

void write_provenance(const fs::path& path, std::span<const ProvenanceRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["original"] = r.original;
    j["output"] = r.output;
    j["kind"] = r.kind;
    j["parameter"] = r.parameter;
    j["seed"] = r.seed;
    out << j.dump() << '\n';
  }
}

}  // namespace ctfdct
