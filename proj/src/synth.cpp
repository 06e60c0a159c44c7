#include "ctfdct/synth.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "ctfdct/dct.hpp"
#include "ctfdct/error.hpp"
#include "ctfdct/parallel.hpp"
#include "ctfdct/rng.hpp"

namespace ctfdct {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

Plane pink_noise(int size, double slope, Rng& rng) {
  const int n = size, half = size / 2 + 1;
  auto* spectrum = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n * half));
  Plane out(n, n);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_c2r_2d(n, n, spectrum, out.samples.data(), FFTW_ESTIMATE);
  }
  for (int r = 0; r < n; ++r) {
    const double fy = r <= n / 2 ? r : r - n;
    for (int c = 0; c < half; ++c) {
      const double f = std::hypot(fy, static_cast<double>(c));
      const double phase = 2.0 * std::numbers::pi * rng.uniform();
      const double amp = f > 0.0 ? std::pow(f, -slope) : 0.0;
      spectrum[r * half + c][0] = amp * std::cos(phase);
      spectrum[r * half + c][1] = amp * std::sin(phase);
    }
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(spectrum);
  return out;
}

void standardize(Plane& p, double mean, double contrast) {
  const double n = static_cast<double>(p.samples.size());
  double m = 0.0;
  for (double v : p.samples) m += v;
  m /= n;
  double var = 0.0;
  for (double v : p.samples) var += (v - m) * (v - m);
  const double scale = var > 0.0 ? contrast / std::sqrt(var / n) : 0.0;
  for (double& v : p.samples) v = mean + (v - m) * scale;
}

void inject(Plane& p, int coefficient, double strength) {
  for (int br = 0; br + 8 <= p.height; br += 8) {
    for (int bc = 0; bc + 8 <= p.width; bc += 8) {
      std::array<double, 64> block{};
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) block[r * 8 + c] = p.at(br + r, bc + c);
      }
      auto coeffs = forward_dct(std::span<const double, 64>(block));
      coeffs.coeffs[coefficient] *= strength;
      const auto pixels = inverse_dct(coeffs);
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) p.at(br + r, bc + c) = pixels[r * 8 + c];
      }
    }
  }
}

}  // namespace

void ArtifactSpec::validate() const {
  if (target_coefficient < 0 || target_coefficient > kAcCoefficients) {
    throw Error(ErrorCode::Spec, "target coefficient must be 1..63 (0 for clean)");
  }
  if (!(strength >= 1.0) || !std::isfinite(strength)) throw Error(ErrorCode::Spec, "strength must be >= 1");
  if (base != "pink") throw Error(ErrorCode::Spec, "unknown base texture: " + base);
}

void TextureConfig::validate() const {
  if (size < 8 || size % 8 != 0) throw Error(ErrorCode::Spec, "texture size must be a positive multiple of 8");
  if (!(contrast > 0.0) || !(slope >= 0.0) || slope_jitter < 0.0 || contrast_jitter < 0.0 || contrast_jitter >= 1.0) {
    throw Error(ErrorCode::Spec, "invalid texture parameters");
  }
}

LuminanceImage generate_image(std::size_t index, const ArtifactSpec& spec, const TextureConfig& texture) {
  spec.validate();
  texture.validate();
  Rng rng(derive_seed(spec.seed, index));
  const double slope = texture.slope + texture.slope_jitter * rng.uniform(-1.0, 1.0);
  const double contrast = texture.contrast * (1.0 + texture.contrast_jitter * rng.uniform(-1.0, 1.0));
  Plane p = pink_noise(texture.size, slope, rng);
  standardize(p, texture.mean, contrast);
  if (!spec.is_clean()) inject(p, spec.target_coefficient, spec.strength);
  for (double& v : p.samples) {
    v = std::clamp(v, 0.0, 255.0);
    if (texture.quantize) v = std::round(v);
  }
  return LuminanceImage(std::move(p));
}

std::vector<LuminanceImage> generate_corpus(std::size_t n, const ArtifactSpec& spec, const TextureConfig& texture,
                                            int jobs) {
  if (n < 1) throw Error(ErrorCode::Spec, "corpus size must be at least 1");
  spec.validate();
  texture.validate();
  std::vector<LuminanceImage> out(n);
  parallel_for(n, jobs, [&](std::size_t i) { out[i] = generate_image(i, spec, texture); });
  return out;
}

}  // namespace ctfdct
