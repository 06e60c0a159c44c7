#include "ctfdct/dct.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ctfdct/error.hpp"

namespace ctfdct {

namespace {

struct Tables {
  // basis[u][x] = C(u)/2 * cos((2x+1) u pi / 16); rows are orthonormal.
  double basis[8][8];
  int natural_to_zigzag[64];
  int zigzag_to_natural[64];
};

Tables make_tables() {
  Tables t{};
  for (int u = 0; u < 8; ++u) {
    const double scale = u == 0 ? 0.5 / std::numbers::sqrt2 : 0.5;
    for (int x = 0; x < 8; ++x) {
      t.basis[u][x] = scale * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
    }
  }
  // Walk anti-diagonals, alternating direction.
  int index = 0;
  for (int s = 0; s < 15; ++s) {
    const int lo = std::max(0, s - 7), hi = std::min(s, 7);
    for (int k = lo; k <= hi; ++k) {
      const int u = (s % 2 == 0) ? s - k : k;
      const int v = s - u;
      t.zigzag_to_natural[index] = u * 8 + v;
      t.natural_to_zigzag[u * 8 + v] = index;
      ++index;
    }
  }
  return t;
}

const Tables& tables() {
  static const Tables t = make_tables();
  return t;
}

void require_finite(std::span<const double> values) {
  if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::Numeric, "non-finite value in DCT input");
  }
}

}  // namespace

int zigzag_index(int u, int v) {
  if (u < 0 || u > 7 || v < 0 || v > 7) {
    throw Error(ErrorCode::Bounds, "frequency position out of range: (" + std::to_string(u) + "," +
                                       std::to_string(v) + ")");
  }
  return tables().natural_to_zigzag[u * 8 + v];
}

FrequencyPosition zigzag_position(int index) {
  if (index < 0 || index > 63) throw Error(ErrorCode::Bounds, "zigzag index out of range: " + std::to_string(index));
  const int natural = tables().zigzag_to_natural[index];
  return {natural / 8, natural % 8};
}

int zigzag_transpose(int index) {
  const auto p = zigzag_position(index);
  return zigzag_index(p.v, p.u);
}

CoefficientBlock forward_dct(std::span<const double, kCoefficients> samples) {
  require_finite(samples);
  const auto& t = tables();
  double tmp[8][8];  // tmp = basis * I
  for (int u = 0; u < 8; ++u) {
    for (int y = 0; y < 8; ++y) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += t.basis[u][x] * samples[x * 8 + y];
      tmp[u][y] = acc;
    }
  }
  CoefficientBlock out;
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += tmp[u][y] * t.basis[v][y];
      out.coeffs[t.natural_to_zigzag[u * 8 + v]] = acc;
    }
  }
  return out;
}

CoefficientBlock forward_dct(const PixelBlock& block) {
  return forward_dct(std::span<const double, kCoefficients>(block.values));
}

std::array<double, kCoefficients> inverse_dct(const CoefficientBlock& block) {
  require_finite(block.coeffs);
  const auto& t = tables();
  double grid[8][8];
  for (int n = 0; n < 64; ++n) grid[n / 8][n % 8] = block.coeffs[t.natural_to_zigzag[n]];
  double tmp[8][8];  // tmp = basis^T * F
  for (int x = 0; x < 8; ++x) {
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += t.basis[u][x] * grid[u][v];
      tmp[x][v] = acc;
    }
  }
  std::array<double, kCoefficients> out{};
  for (int x = 0; x < 8; ++x) {
    for (int y = 0; y < 8; ++y) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += tmp[x][v] * t.basis[v][y];
      out[x * 8 + y] = acc;
    }
  }
  return out;
}

std::vector<CoefficientBlock> block_dct(const LuminanceImage& img) {
  const auto blocks = tile(img);
  std::vector<CoefficientBlock> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(forward_dct(b));
  return out;
}

}  // namespace ctfdct
