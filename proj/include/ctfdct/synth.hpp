#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctfdct/image_io.hpp"

namespace ctfdct {

// Injected single-coefficient artifact. target_coefficient == 0 means a clean
// corpus; otherwise every 8x8 block's coefficient at that zigzag index is
// multiplied by strength before the inverse DCT.
struct ArtifactSpec {
  int target_coefficient = 0;
  double strength = 1.0;
  std::string base = "pink";
  std::uint64_t seed = 0;

  static ArtifactSpec clean(std::uint64_t seed) { return {0, 1.0, "pink", seed}; }
  static ArtifactSpec inject(int coefficient, double strength, std::uint64_t seed) {
    return {coefficient, strength, "pink", seed};
  }

  bool is_clean() const { return target_coefficient == 0 || strength == 1.0; }
  void validate() const;
};

// Base texture: random-phase noise with amplitude 1/f^slope, standardised to
// the given mean and contrast, then clamped to [0, 255]. Slope and contrast
// get a small per-image jitter so sets are not pixel-identical in statistics.
struct TextureConfig {
  int size = 128;
  double slope = 1.0;
  double slope_jitter = 0.05;
  double mean = 128.0;
  double contrast = 40.0;
  double contrast_jitter = 0.1;  // relative
  bool quantize = false;         // round to integers as an 8-bit file would

  void validate() const;
};

LuminanceImage generate_image(std::size_t index, const ArtifactSpec& spec, const TextureConfig& texture = {});
std::vector<LuminanceImage> generate_corpus(std::size_t n, const ArtifactSpec& spec, const TextureConfig& texture = {},
                                            int jobs = 1);

}  // namespace ctfdct
