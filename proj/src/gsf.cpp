#include "ctfdct/gsf.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <string>

#include <fftw3.h>

#include "ctfdct/dct.hpp"
#include "ctfdct/error.hpp"
#include "ctfdct/rng.hpp"

namespace ctfdct {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Full complex DFT of a real raster, row-major, unshifted.
std::vector<std::complex<double>> dft2(const Plane& img) {
  const std::size_t n = img.samples.size();
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(img.height, img.width, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) {
    buf[i][0] = img.samples[i];
    buf[i][1] = 0.0;
  }
  fftw_execute(plan);
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {buf[i][0], buf[i][1]};
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return out;
}

int signed_frequency(int k, int n) { return k <= n / 2 ? k : k - n; }

void check_spectrum_input(const Plane& img) {
  if (img.width < 8 || img.height < 8) throw Error(ErrorCode::Dimension, "spectrum input must be at least 8x8");
  for (double v : img.samples) {
    if (!std::isfinite(v)) throw Error(ErrorCode::Numeric, "non-finite sample in spectrum input");
  }
}

}  // namespace

BetaRow chi2_vector(const BetaMatrix& a, const BetaMatrix& b) {
  if (!a.normalized() || !b.normalized()) {
    throw Error(ErrorCode::Contract, "chi2 requires column-normalized matrices");
  }
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::Shape, "chi2 requires equal row counts (" + std::to_string(a.rows()) + " vs " +
                                      std::to_string(b.rows()) + ")");
  }
  BetaRow chi2{};
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto& ra = a.row(r);
    const auto& rb = b.row(r);
    for (std::size_t c = 0; c < chi2.size(); ++c) {
      const double d = ra[c] - rb[c];
      chi2[c] += d * d / rb[c];
    }
  }
  return chi2;
}

GsfResult gsf_from_chi2(const BetaRow& chi2) {
  GsfResult out;
  out.chi2 = chi2;
  int best = -1, second = -1;
  for (int i = 0; i < static_cast<int>(chi2.size()); ++i) {
    if (best < 0 || chi2[i] >= chi2[best]) {
      second = best;
      best = i;
    } else if (second < 0 || chi2[i] >= chi2[second]) {
      second = i;
    }
  }
  if (!(chi2[best] > 0.0)) throw Error(ErrorCode::NoSignal, "chi2 vector is identically zero; sets are indistinguishable");
  out.gsf = best + 1;
  out.runner_up = second + 1;
  out.margin = chi2[best] - chi2[second];
  return out;
}

GsfResult gsf(const BetaMatrix& a, const BetaMatrix& b) { return gsf_from_chi2(chi2_vector(a, b)); }

GsfAnalysis analyze_pair(const BetaMatrix& raw_a, const BetaMatrix& raw_b, const GsfOptions& options) {
  std::size_t k = std::min(raw_a.rows(), raw_b.rows());
  if (options.max_rows > 0) k = std::min(k, options.max_rows);
  if (k < 2) throw Error(ErrorCode::InsufficientData, "each set needs at least 2 rows");
  auto subsample = [&](const BetaMatrix& m) {
    auto order = Rng(options.seed).permutation(m.rows());
    order.resize(k);
    return m.select(order);
  };
  const auto pair = normalize_columns(subsample(raw_a), subsample(raw_b), options.mode, options.scheme);
  GsfAnalysis out;
  out.rows = k;
  out.seed = options.seed;
  out.reverse_chi2 = chi2_vector(pair.b, pair.a);
  out.forward = gsf(pair.a, pair.b);
  return out;
}

void AmplificationParams::validate() const {
  if (!(k1 > 0.0 && k1 <= 1.0)) throw Error(ErrorCode::Spec, "k1 must satisfy 0 < k1 <= 1");
  if (!(k2 >= 1.0) || !std::isfinite(k2)) throw Error(ErrorCode::Spec, "k2 must be finite and >= 1");
}

Plane amplify(const LuminanceImage& img, int gsf_index, const AmplificationParams& params) {
  if (gsf_index < 1 || gsf_index > kAcCoefficients) {
    throw Error(ErrorCode::Bounds, "gsf index must be in 1..63, got " + std::to_string(gsf_index));
  }
  params.validate();
  Plane out = img.plane();
  for (double& v : out.samples) v *= params.k1;
  for (const auto& block : tile(img)) {
    auto coeffs = forward_dct(block);
    for (int c = 0; c < kCoefficients; ++c) coeffs.coeffs[c] *= (c == gsf_index) ? params.k2 : params.k1;
    const auto pixels = inverse_dct(coeffs);
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) out.at(block.block_row * 8 + r, block.block_col * 8 + c) = pixels[r * 8 + c];
    }
  }
  return out;
}

LuminanceImage render(const Plane& plane) { return LuminanceImage::clamped(plane); }

Plane fourier_magnitude(const Plane& img) {
  check_spectrum_input(img);
  const auto spectrum = dft2(img);
  Plane out(img.width, img.height);
  const int h = img.height, w = img.width;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      // fftshift: frequency (0,0) lands at (h/2, w/2).
      const int rr = (r + h / 2) % h, cc = (c + w / 2) % w;
      out.at(rr, cc) = std::log1p(std::abs(spectrum[static_cast<std::size_t>(r) * w + c]));
    }
  }
  const auto [lo, hi] = std::minmax_element(out.samples.begin(), out.samples.end());
  const double min = *lo, range = *hi - *lo;
  for (double& v : out.samples) v = range > 0.0 ? 255.0 * (v - min) / range : 0.0;
  return out;
}

double spectral_peak_ratio(const Plane& img) {
  check_spectrum_input(img);
  const auto spectrum = dft2(img);
  const int h = img.height, w = img.width;
  const double m = std::min(h, w);
  std::map<int, std::vector<double>> annuli;
  std::vector<std::pair<int, double>> bins;
  bins.reserve(spectrum.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double fy = signed_frequency(r, h) * m / h;
      const double fx = signed_frequency(c, w) * m / w;
      const int radius = static_cast<int>(std::lround(std::hypot(fy, fx)));
      if (radius < 2) continue;
      const double mag = std::abs(spectrum[static_cast<std::size_t>(r) * w + c]);
      annuli[radius].push_back(mag);
      bins.emplace_back(radius, mag);
    }
  }
  std::map<int, double> medians;
  for (auto& [radius, mags] : annuli) {
    if (mags.size() < 8) continue;
    auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
    std::nth_element(mags.begin(), mid, mags.end());
    medians[radius] = *mid;
  }
  double best = 0.0;
  for (const auto& [radius, mag] : bins) {
    const auto it = medians.find(radius);
    if (it == medians.end()) continue;
    if (it->second > 0.0) {
      best = std::max(best, mag / it->second);
    } else if (mag > 0.0) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return best;
}

}  // namespace ctfdct
