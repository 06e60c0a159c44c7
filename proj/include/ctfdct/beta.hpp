#pragma once

#include <array>
#include <bitset>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctfdct/dct.hpp"
#include "ctfdct/image_io.hpp"

namespace ctfdct {

using BetaRow = std::array<double, kAcCoefficients>;

// Laplacian fit of one AC coefficient: location fixed at 0, beta = sigma / sqrt(2).
struct LaplacianStats {
  double mu = 0.0;
  double sigma = 0.0;
  double beta = 0.0;

  static LaplacianStats from_sigma(double sigma);
};

// Per-image statistics. betas[c - 1] belongs to zigzag AC coefficient c.
struct BetaVector {
  BetaRow betas{};
  std::size_t block_count = 0;
  std::string source_id;
  // True when at least one coefficient had zero variance across blocks.
  bool degenerate = false;

  double beta(int coefficient) const { return betas.at(static_cast<std::size_t>(coefficient - 1)); }
};

// Population standard deviation of every AC coefficient across blocks.
BetaVector beta_vector(std::span<const CoefficientBlock> blocks, std::string source_id = {});
BetaVector image_betas(const LuminanceImage& img, std::string source_id = {});

enum class NormalizationMode { Joint, PerSet };

NormalizationMode parse_normalization_mode(std::string_view name);
std::string_view to_string(NormalizationMode mode);

inline constexpr double kNormalizationFloor = 1e-6;

// MaxScale: v -> max(v / hi, floor). MinMax: v -> floor + (1 - floor)(v - lo)/(hi - lo).
// MaxScale is the default: under MinMax the column minimum lands exactly on
// the floor and dominates any chi-square term that divides by it.
enum class ScalingScheme { MaxScale, MinMax };

struct ColumnScaling {
  ScalingScheme scheme = ScalingScheme::MaxScale;
  BetaRow lo{};
  BetaRow hi{};
  // Columns with hi == lo; they map to the constant 1.
  std::bitset<kAcCoefficients> zero_range;

  double apply(int column, double value) const;
};

// K x 63 statistics of one image set.
class BetaMatrix {
 public:
  BetaMatrix() = default;

  std::size_t rows() const { return values_.size(); }
  static constexpr std::size_t cols() { return kAcCoefficients; }
  const std::string& label() const { return label_; }

  const BetaRow& row(std::size_t r) const { return values_.at(r); }
  double at(std::size_t r, int coefficient) const { return values_.at(r)[static_cast<std::size_t>(coefficient - 1)]; }
  const std::vector<BetaRow>& values() const { return values_; }
  const std::vector<std::string>& source_ids() const { return source_ids_; }

  bool normalized() const { return normalized_; }
  // Scaling that produced this matrix; meaningful only when normalized().
  const ColumnScaling& scaling() const { return scaling_; }

  // Row subset in the given order (used for seeded subsampling and shuffles).
  BetaMatrix select(std::span<const std::size_t> order) const;

  friend BetaMatrix build_matrix(std::span<const BetaVector> images, std::string label);
  friend BetaMatrix apply_scaling(const BetaMatrix& m, const ColumnScaling& scaling);

 private:
  std::vector<BetaRow> values_;
  std::vector<std::string> source_ids_;
  std::string label_;
  bool normalized_ = false;
  ColumnScaling scaling_;
};

// Stacks rows in input order. Requires at least two rows.
BetaMatrix build_matrix(std::span<const BetaVector> images, std::string label);

ColumnScaling column_scaling(std::span<const BetaMatrix* const> matrices,
                             ScalingScheme scheme = ScalingScheme::MaxScale);
BetaMatrix apply_scaling(const BetaMatrix& m, const ColumnScaling& scaling);

struct NormalizedPair {
  BetaMatrix a;
  BetaMatrix b;
};

// Column-wise rescale into [floor, 1]. Joint mode derives one scaling from the
// union of both matrices; per-set mode scales each matrix by its own columns.
NormalizedPair normalize_columns(const BetaMatrix& a, const BetaMatrix& b,
                                 NormalizationMode mode = NormalizationMode::Joint,
                                 ScalingScheme scheme = ScalingScheme::MaxScale);

}  // namespace ctfdct
