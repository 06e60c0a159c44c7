#include "ctfdct/beta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ctfdct/error.hpp"

namespace ctfdct {

LaplacianStats LaplacianStats::from_sigma(double sigma) {
  return {0.0, sigma, sigma / std::numbers::sqrt2};
}

BetaVector beta_vector(std::span<const CoefficientBlock> blocks, std::string source_id) {
  if (blocks.size() < 2) throw Error(ErrorCode::InsufficientData, "beta estimation needs at least 2 blocks");
  const double n = static_cast<double>(blocks.size());
  BetaRow mean{};
  for (const auto& b : blocks) {
    for (int c = 1; c < kCoefficients; ++c) mean[c - 1] += b.coeffs[c];
  }
  for (double& m : mean) m /= n;
  // Two-pass variance; the centered form keeps identical blocks at exactly 0.
  BetaRow ss{};
  for (const auto& b : blocks) {
    for (int c = 1; c < kCoefficients; ++c) {
      const double d = b.coeffs[c] - mean[c - 1];
      ss[c - 1] += d * d;
    }
  }
  BetaVector out;
  out.block_count = blocks.size();
  out.source_id = std::move(source_id);
  for (std::size_t i = 0; i < ss.size(); ++i) {
    out.betas[i] = LaplacianStats::from_sigma(std::sqrt(ss[i] / n)).beta;
    if (out.betas[i] == 0.0) out.degenerate = true;
  }
  return out;
}

BetaVector image_betas(const LuminanceImage& img, std::string source_id) {
  const auto blocks = block_dct(img);
  return beta_vector(blocks, std::move(source_id));
}

NormalizationMode parse_normalization_mode(std::string_view name) {
  if (name == "joint") return NormalizationMode::Joint;
  if (name == "per-set") return NormalizationMode::PerSet;
  throw Error(ErrorCode::Usage, "unknown normalization mode: " + std::string(name));
}

std::string_view to_string(NormalizationMode mode) {
  return mode == NormalizationMode::Joint ? "joint" : "per-set";
}

double ColumnScaling::apply(int column, double value) const {
  const auto i = static_cast<std::size_t>(column);
  if (zero_range[i]) return 1.0;
  double y = 0.0;
  if (scheme == ScalingScheme::MinMax) {
    y = kNormalizationFloor + (1.0 - kNormalizationFloor) * (value - lo[i]) / (hi[i] - lo[i]);
  } else {
    y = value / hi[i];
  }
  return std::clamp(y, kNormalizationFloor, 1.0);
}

BetaMatrix BetaMatrix::select(std::span<const std::size_t> order) const {
  BetaMatrix out;
  out.label_ = label_;
  out.normalized_ = normalized_;
  out.scaling_ = scaling_;
  out.values_.reserve(order.size());
  out.source_ids_.reserve(order.size());
  for (std::size_t r : order) {
    out.values_.push_back(values_.at(r));
    out.source_ids_.push_back(source_ids_.at(r));
  }
  return out;
}

BetaMatrix build_matrix(std::span<const BetaVector> images, std::string label) {
  if (images.size() < 2) throw Error(ErrorCode::InsufficientData, "a beta matrix needs at least 2 rows");
  BetaMatrix m;
  m.label_ = std::move(label);
  m.values_.reserve(images.size());
  m.source_ids_.reserve(images.size());
  for (const auto& v : images) {
    m.values_.push_back(v.betas);
    m.source_ids_.push_back(v.source_id);
  }
  return m;
}

ColumnScaling column_scaling(std::span<const BetaMatrix* const> matrices, ScalingScheme scheme) {
  ColumnScaling s;
  s.scheme = scheme;
  s.lo.fill(std::numeric_limits<double>::infinity());
  s.hi.fill(-std::numeric_limits<double>::infinity());
  for (const BetaMatrix* m : matrices) {
    for (const auto& row : m->values()) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        s.lo[c] = std::min(s.lo[c], row[c]);
        s.hi[c] = std::max(s.hi[c], row[c]);
      }
    }
  }
  for (std::size_t c = 0; c < s.lo.size(); ++c) {
    // MaxScale with hi == 0 also has nothing to scale by.
    s.zero_range[c] = !(s.hi[c] > s.lo[c]) || !(s.hi[c] > 0.0);
  }
  return s;
}

BetaMatrix apply_scaling(const BetaMatrix& m, const ColumnScaling& scaling) {
  BetaMatrix out = m;
  for (auto& row : out.values_) {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = scaling.apply(static_cast<int>(c), row[c]);
  }
  out.normalized_ = true;
  out.scaling_ = scaling;
  return out;
}

NormalizedPair normalize_columns(const BetaMatrix& a, const BetaMatrix& b, NormalizationMode mode,
                                 ScalingScheme scheme) {
  if (mode == NormalizationMode::Joint) {
    const BetaMatrix* both[] = {&a, &b};
    const auto s = column_scaling(both, scheme);
    return {apply_scaling(a, s), apply_scaling(b, s)};
  }
  const BetaMatrix* only_a[] = {&a};
  const BetaMatrix* only_b[] = {&b};
  return {apply_scaling(a, column_scaling(only_a, scheme)), apply_scaling(b, column_scaling(only_b, scheme))};
}

}  // namespace ctfdct
