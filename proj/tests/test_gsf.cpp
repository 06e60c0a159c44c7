#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ctfdct/gsf.hpp"
#include "ctfdct/synth.hpp"
#include "support.hpp"

using namespace ctfdct;
using testing::error_of;

namespace {

BetaMatrix matrix(std::size_t rows, auto&& fill, const std::string& label = "m") {
  std::vector<BetaVector> v(rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (int c = 1; c <= 63; ++c) v[r].betas[c - 1] = fill(r, c);
  return build_matrix(v, label);
}

BetaMatrix betas_of(const std::vector<LuminanceImage>& images) {
  std::vector<BetaVector> rows;
  for (const auto& img : images) rows.push_back(image_betas(img));
  return build_matrix(rows, "set");
}

}  // namespace

TEST_CASE("chi2 of a matrix against itself is zero and gsf reports no signal") {
  Rng rng(1);
  const auto a = matrix(30, [&](auto, int) { return rng.uniform(1.0, 5.0); });
  const auto n = normalize_columns(a, a);
  for (double x : chi2_vector(n.a, n.b)) CHECK(x == 0.0);
  CHECK(error_of([&] { gsf(n.a, n.b); }) == ErrorCode::NoSignal);
}

TEST_CASE("closed form: B column 1, A column 0.5, K = 100") {
  const auto a = matrix(100, [](auto, int c) { return c == 20 ? 0.5 : 3.0; });
  const auto b = matrix(100, [](auto, int c) { return c == 20 ? 1.0 : 3.0; });
  const auto n = normalize_columns(a, b);
  CHECK(n.a.at(0, 20) == 0.5);
  CHECK(n.b.at(0, 20) == 1.0);
  const auto chi2 = chi2_vector(n.a, n.b);
  CHECK(std::abs(chi2[19] - 25.0) < 1e-12);
  for (int c = 1; c <= 63; ++c)
    if (c != 20) CHECK(chi2[c - 1] == 0.0);
  const auto g = gsf(n.a, n.b);
  CHECK(g.gsf == 20);
  CHECK(g.margin == doctest::Approx(25.0));
}

TEST_CASE("only column 54 differs") {
  Rng rng(54);
  std::vector<std::vector<double>> base(40, std::vector<double>(63));
  for (auto& row : base)
    for (auto& x : row) x = rng.uniform(0.5, 9.0);
  const auto a = matrix(40, [&](std::size_t r, int c) { return base[r][c - 1] * (c == 54 ? 1.7 : 1.0); });
  const auto b = matrix(40, [&](std::size_t r, int c) { return base[r][c - 1]; });
  const auto n = normalize_columns(a, b);
  const auto chi2 = chi2_vector(n.a, n.b);
  // Brute-force sum over the normalized entries.
  double expected = 0.0;
  for (std::size_t r = 0; r < 40; ++r) {
    const double d = n.a.at(r, 54) - n.b.at(r, 54);
    expected += d * d / n.b.at(r, 54);
  }
  CHECK(chi2[53] > 0.0);
  CHECK(std::abs(chi2[53] - expected) <= 1e-12 * expected);
  for (int c = 1; c <= 63; ++c)
    if (c != 54) CHECK(chi2[c - 1] == 0.0);
  CHECK(gsf(n.a, n.b).gsf == 54);
}

TEST_CASE("argmax ties go to the higher coefficient") {
  BetaRow chi2{};
  chi2[9] = 4.0;
  chi2[39] = 4.0;
  chi2[2] = 1.0;
  const auto g = gsf_from_chi2(chi2);
  CHECK(g.gsf == 40);
  CHECK(g.runner_up == 10);
  CHECK(g.margin == 0.0);
  BetaRow zero{};
  CHECK(error_of([&] { gsf_from_chi2(zero); }) == ErrorCode::NoSignal);
}

TEST_CASE("chi2 contract errors") {
  const auto a = matrix(10, [](auto, int) { return 1.0; });
  const auto b = matrix(12, [](auto, int) { return 2.0; });
  CHECK(error_of([&] { chi2_vector(a, a); }) == ErrorCode::Contract);
  const auto n = normalize_columns(a, b);
  CHECK(error_of([&] { chi2_vector(n.a, n.b); }) == ErrorCode::Shape);
}

TEST_CASE("gsf result invariants on random pairs") {
  Rng rng(77);
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 2 + rng.below(40);
    const auto a = matrix(k, [&](auto, int) { return rng.uniform(0.0, 20.0); });
    const auto b = matrix(k, [&](auto, int) { return rng.uniform(0.0, 20.0); });
    const auto n = normalize_columns(a, b);
    const auto g = gsf(n.a, n.b);
    for (double x : g.chi2) {
      CHECK(x >= 0.0);
      CHECK(x <= g.chi2_at(g.gsf));
    }
    CHECK(g.margin >= 0.0);
    CHECK(g.runner_up != g.gsf);
    CHECK(g.margin == g.chi2_at(g.gsf) - g.chi2_at(g.runner_up));

    // Joint rescaling of raw betas leaves chi2 unchanged.
    const double s = rng.uniform(0.1, 10.0);
    const auto as = matrix(k, [&](std::size_t r, int c) { return a.at(r, c) * s; });
    const auto bs = matrix(k, [&](std::size_t r, int c) { return b.at(r, c) * s; });
    const auto ns = normalize_columns(as, bs);
    const auto gs = gsf(ns.a, ns.b);
    CHECK(gs.gsf == g.gsf);
    for (int c = 1; c <= 63; ++c) CHECK(std::abs(gs.chi2_at(c) - g.chi2_at(c)) <= 1e-9 * (1.0 + g.chi2_at(c)));
  }
}

TEST_CASE("analyze_pair subsamples, pairs and reports both directions") {
  Rng rng(5);
  const auto a = matrix(50, [&](auto, int c) { return rng.uniform(1.0, 2.0) * (c == 30 ? 2.0 : 1.0); });
  const auto b = matrix(80, [&](auto, int) { return rng.uniform(1.0, 2.0); });
  GsfOptions opt;
  opt.seed = 3;
  const auto r = analyze_pair(a, b, opt);
  CHECK(r.rows == 50);
  CHECK(r.forward.gsf == 30);
  CHECK(gsf_from_chi2(r.reverse_chi2).gsf == 30);
  const auto again = analyze_pair(a, b, opt);
  CHECK(again.forward.chi2 == r.forward.chi2);

  opt.max_rows = 20;
  CHECK(analyze_pair(a, b, opt).rows == 20);
  // A set against itself pairs row for row.
  CHECK(error_of([&] { analyze_pair(b, b, opt); }) == ErrorCode::NoSignal);
}

TEST_CASE("injected coefficient against its unmodified copy") {
  TextureConfig tex;
  tex.size = 64;
  const auto clean = betas_of(generate_corpus(60, ArtifactSpec::clean(42), tex));
  const auto injected = betas_of(generate_corpus(60, ArtifactSpec::inject(17, 2.0, 42), tex));
  CHECK(analyze_pair(injected, clean).forward.gsf == 17);
}

TEST_CASE("amplify identity, constant image, bounds") {
  Rng rng(6);
  const auto img = testing::random_image(rng, 45, 37);
  const auto same = amplify(img, 10, {1.0, 1.0});
  for (std::size_t i = 0; i < same.samples.size(); ++i) CHECK(std::abs(same.samples[i] - img.samples()[i]) < 1e-9);

  const LuminanceImage flat(40, 24, std::vector<double>(40 * 24, 200.0));
  for (int g : {1, 33, 63}) {
    const auto out = amplify(flat, g);
    for (double v : out.samples) CHECK(std::abs(v - 20.0) < 1e-9);
  }

  CHECK(error_of([&] { amplify(img, 0); }) == ErrorCode::Bounds);
  CHECK(error_of([&] { amplify(img, 64); }) == ErrorCode::Bounds);
  CHECK(error_of([&] { amplify(img, 5, {0.0, 100.0}); }) == ErrorCode::Spec);
  CHECK(error_of([&] { amplify(img, 5, {0.1, 0.5}); }) == ErrorCode::Spec);
  AmplificationParams defaults;
  CHECK(defaults.k1 == 0.1);
  CHECK(defaults.k2 == 100.0);
}

TEST_CASE("amplify boosts only the chosen coefficient") {
  Rng rng(7);
  const auto img = testing::random_image(rng, 32, 32);
  const auto out = amplify(img, 12, {0.1, 100.0});
  const auto before = block_dct(img);
  std::vector<double> unclamped(out.samples);
  // Re-tile the unclamped field by hand and compare coefficients.
  for (std::size_t b = 0; b < before.size(); ++b) {
    std::array<double, 64> px{};
    const int br = static_cast<int>(b) / 4, bc = static_cast<int>(b) % 4;
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) px[r * 8 + c] = out.at(br * 8 + r, bc * 8 + c);
    const auto after = forward_dct(std::span<const double, 64>(px));
    for (int i = 0; i < 64; ++i) {
      const double k = i == 12 ? 100.0 : 0.1;
      CHECK(std::abs(after.coeffs[i] - k * before[b].coeffs[i]) < 1e-8);
    }
  }
  const auto shown = render(out);
  for (double v : shown.samples()) {
    CHECK(v >= 0.0);
    CHECK(v <= 255.0);
  }
}

TEST_CASE("fourier magnitude of simple signals") {
  const LuminanceImage flat(32, 32, std::vector<double>(32 * 32, 90.0));
  const auto f = fourier_magnitude(flat);
  CHECK(f.at(16, 16) == doctest::Approx(255.0));
  double off = 0.0;
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c)
      if (r != 16 || c != 16) off = std::max(off, f.at(r, c));
  CHECK(off < 1e-6);

  // Horizontal cosine with a period of 8 pixels on a 64-wide image.
  std::vector<double> px(64 * 32);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 64; ++c) px[r * 64 + c] = 128.0 + 100.0 * std::cos(2.0 * M_PI * c / 8.0);
  const auto g = fourier_magnitude(LuminanceImage(64, 32, px));
  const double left = g.at(16, 32 - 8), right = g.at(16, 32 + 8);
  CHECK(left == doctest::Approx(right));
  CHECK(left > 200.0);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 64; ++c) {
      const bool peak = r == 16 && (c == 24 || c == 40 || c == 32);
      if (!peak) CHECK(g.at(r, c) < 1e-6);
    }
}

TEST_CASE("amplified injected image has a spectral peak, clean texture does not") {
  TextureConfig tex;
  tex.quantize = true;
  const auto injected = generate_image(0, ArtifactSpec::inject(27, 2.0, 9), tex);
  const auto clean = generate_image(0, ArtifactSpec::clean(9), tex);
  CHECK(spectral_peak_ratio(render(amplify(injected, 27))) > 10.0);
  CHECK(spectral_peak_ratio(clean) < 3.0);
}
