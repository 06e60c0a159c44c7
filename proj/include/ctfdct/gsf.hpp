#pragma once

#include <cstdint>

#include "ctfdct/beta.hpp"
#include "ctfdct/image_io.hpp"

namespace ctfdct {

struct GsfResult {
  BetaRow chi2{};      // chi2[c - 1] for AC coefficient c
  int gsf = 0;         // argmax coefficient, 1..63
  int runner_up = 0;   // second-best coefficient
  double margin = 0.0; // chi2 at gsf minus chi2 at runner_up

  double chi2_at(int coefficient) const { return chi2.at(static_cast<std::size_t>(coefficient - 1)); }
};

// chi2[c] = sum_r (A[r,c] - B[r,c])^2 / B[r,c], rows paired by index.
// Both matrices must be normalized and have the same row count.
BetaRow chi2_vector(const BetaMatrix& a, const BetaMatrix& b);

// Argmax of chi2_vector; ties go to the higher coefficient.
// Throws ErrorCode::NoSignal when every entry is zero.
GsfResult gsf(const BetaMatrix& a, const BetaMatrix& b);
GsfResult gsf_from_chi2(const BetaRow& chi2);

struct GsfOptions {
  std::uint64_t seed = 0;
  std::size_t max_rows = 0;  // 0: use min(rows(a), rows(b))
  NormalizationMode mode = NormalizationMode::Joint;
  ScalingScheme scheme = ScalingScheme::MaxScale;
};

struct GsfAnalysis {
  GsfResult forward;  // denominator: set b
  BetaRow reverse_chi2{};  // denominator: set a
  std::size_t rows = 0;
  std::uint64_t seed = 0;
};

// Raw matrices in, report out: seeded subsample to a common K, joint
// normalization, chi2 in both directions. Equal-length inputs get the same
// permutation so a set compared with itself pairs row-for-row.
GsfAnalysis analyze_pair(const BetaMatrix& raw_a, const BetaMatrix& raw_b, const GsfOptions& options = {});

struct AmplificationParams {
  double k1 = 0.1;  // every non-GSF coefficient, DC included; 0 < k1 <= 1
  double k2 = 100;  // the GSF coefficient; k2 >= 1

  void validate() const;
};

// Per block: DCT, scale, inverse DCT. Pixels outside complete blocks are
// scaled by k1. The result is not clamped; use render() for display.
Plane amplify(const LuminanceImage& img, int gsf_index, const AmplificationParams& params = {});
LuminanceImage render(const Plane& plane);

// Centered log(1 + |DFT|), rescaled to [0, 255].
Plane fourier_magnitude(const Plane& img);
inline Plane fourier_magnitude(const LuminanceImage& img) { return fourier_magnitude(img.plane()); }

// Largest ratio of a linear DFT magnitude to the median magnitude of its
// radial annulus. Annuli below radius 2 and annuli with fewer than 8 bins
// are skipped, which also drops DC.
double spectral_peak_ratio(const Plane& img);
inline double spectral_peak_ratio(const LuminanceImage& img) { return spectral_peak_ratio(img.plane()); }

}  // namespace ctfdct
