#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ctfdct/image_io.hpp"

namespace ctfdct {

enum class AttackKind { RandomSquare, GaussianBlur, Rotation, Mirror, Scale, Jpeg };
enum class MirrorAxis { Horizontal, Vertical, Both };

// value: kernel size (blur), degrees counterclockwise (rotation), signed
// percent (scale) or quality factor (jpeg). axis applies to mirror only.
struct AttackSpec {
  AttackKind kind = AttackKind::Mirror;
  int value = 0;
  MirrorAxis axis = MirrorAxis::Horizontal;
  std::uint64_t seed = 0;

  // Throws ErrorCode::Spec unless the parameter is on the evaluation grid.
  void validate() const;
  // "random-square", "gaussian-blur:9", "rotation:45", "mirror:H", "scale:-50", "jpeg:50".
  static AttackSpec parse(std::string_view text, std::uint64_t seed = 0);
  std::string to_string() const;
  std::string parameter_string() const;
  // File-name friendly tag, e.g. "jpeg-q50".
  std::string tag() const;
};

std::string_view to_string(AttackKind kind);

// The 17-row robustness grid.
std::vector<AttackSpec> attack_grid(std::uint64_t seed = 0);

// Deterministic given (image, spec). Multiples of 90 degrees and mirrors are
// exact pixel permutations.
LuminanceImage apply_attack(const LuminanceImage& img, const AttackSpec& spec);
RgbImage apply_attack(const RgbImage& img, const AttackSpec& spec);

// Standard kernel-size-to-sigma convention: 0.3((k - 1)/2 - 1) + 0.8.
double blur_sigma(int kernel);

}  // namespace ctfdct
