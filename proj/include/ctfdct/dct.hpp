#pragma once

#include <array>
#include <span>
#include <vector>

#include "ctfdct/image_io.hpp"

namespace ctfdct {

inline constexpr int kBlockSize = 8;
inline constexpr int kCoefficients = 64;
inline constexpr int kAcCoefficients = 63;

// One 8x8 block of DCT coefficients in zigzag order: [0] is DC, [1..63] AC.
struct CoefficientBlock {
  std::array<double, kCoefficients> coeffs{};

  double dc() const { return coeffs[0]; }
};

struct FrequencyPosition {
  int u = 0;  // vertical frequency (row)
  int v = 0;  // horizontal frequency (column)

  friend bool operator==(const FrequencyPosition&, const FrequencyPosition&) = default;
};

// Standard JPEG zigzag permutation. Throws ErrorCode::Bounds when out of range.
int zigzag_index(int u, int v);
FrequencyPosition zigzag_position(int index);

// Zigzag index of the coefficient with u and v swapped.
int zigzag_transpose(int index);

// F[u,v] = 1/4 C(u) C(v) sum_x sum_y I[x,y] cos((2x+1)u pi/16) cos((2y+1)v pi/16),
// evaluated as two separable 8x8 products. No level shift.
CoefficientBlock forward_dct(const PixelBlock& block);
CoefficientBlock forward_dct(std::span<const double, kCoefficients> samples);

// Exact adjoint of forward_dct; row-major samples, not clamped.
std::array<double, kCoefficients> inverse_dct(const CoefficientBlock& block);

// Tile and transform every complete block of the image.
std::vector<CoefficientBlock> block_dct(const LuminanceImage& img);

}  // namespace ctfdct
