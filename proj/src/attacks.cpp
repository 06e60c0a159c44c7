#include "ctfdct/attacks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "ctfdct/error.hpp"
#include "ctfdct/rng.hpp"

namespace ctfdct {

namespace {

// Interleaved multi-channel real raster used by every attack.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  Raster(int w, int h, int ch, double fill = 0.0)
      : width(w), height(h), channels(ch), data(static_cast<std::size_t>(w) * h * ch, fill) {}

  double* px(int row, int col) { return &data[(static_cast<std::size_t>(row) * width + col) * channels]; }
  const double* px(int row, int col) const {
    return &data[(static_cast<std::size_t>(row) * width + col) * channels];
  }
};

Raster from_image(const LuminanceImage& img) {
  Raster r(img.width(), img.height(), 1);
  std::copy(img.samples().begin(), img.samples().end(), r.data.begin());
  return r;
}

Raster from_image(const RgbImage& img) {
  Raster r(img.width, img.height, 3);
  std::copy(img.pixels.begin(), img.pixels.end(), r.data.begin());
  return r;
}

LuminanceImage to_luminance_image(Raster r) {
  for (double& v : r.data) v = std::clamp(v, 0.0, 255.0);
  return LuminanceImage(r.width, r.height, std::move(r.data));
}

RgbImage to_rgb_image(const Raster& r) {
  RgbImage out{r.width, r.height, std::vector<std::uint8_t>(r.data.size())};
  for (std::size_t i = 0; i < r.data.size(); ++i) {
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(r.data[i]), 0L, 255L));
  }
  return out;
}

Raster random_square(Raster img, std::uint64_t seed) {
  Rng rng(seed);
  const double side = std::min(img.width, img.height);
  auto draw_side = [&](int limit) {
    const int s = static_cast<int>(std::lround(rng.uniform(0.1, 0.3) * side));
    return std::clamp(s, 1, limit);
  };
  const int rect_w = draw_side(img.width);
  const int rect_h = draw_side(img.height);
  const int col0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.width - rect_w + 1)));
  const int row0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.height - rect_h + 1)));
  std::array<double, 3> color{};
  for (int ch = 0; ch < img.channels; ++ch) color[ch] = static_cast<double>(rng.below(256));
  for (int r = row0; r < row0 + rect_h; ++r) {
    for (int c = col0; c < col0 + rect_w; ++c) std::copy_n(color.begin(), img.channels, img.px(r, c));
  }
  return img;
}

int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

Raster gaussian_blur(const Raster& img, int kernel) {
  const double sigma = blur_sigma(kernel);
  const int half = kernel / 2;
  std::vector<double> weights(static_cast<std::size_t>(kernel));
  double sum = 0.0;
  for (int i = 0; i < kernel; ++i) {
    const double d = i - half;
    weights[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += weights[i];
  }
  for (double& w : weights) w /= sum;

  Raster tmp(img.width, img.height, img.channels);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      for (int ch = 0; ch < img.channels; ++ch) {
        double acc = 0.0;
        for (int k = 0; k < kernel; ++k) acc += weights[k] * img.px(r, reflect101(c + k - half, img.width))[ch];
        tmp.px(r, c)[ch] = acc;
      }
    }
  }
  Raster out(img.width, img.height, img.channels);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      for (int ch = 0; ch < img.channels; ++ch) {
        double acc = 0.0;
        for (int k = 0; k < kernel; ++k) acc += weights[k] * tmp.px(reflect101(r + k - half, img.height), c)[ch];
        out.px(r, c)[ch] = acc;
      }
    }
  }
  return out;
}

Raster mirror(const Raster& img, MirrorAxis axis) {
  const bool flip_cols = axis != MirrorAxis::Vertical;
  const bool flip_rows = axis != MirrorAxis::Horizontal;
  Raster out(img.width, img.height, img.channels);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const int sr = flip_rows ? img.height - 1 - r : r;
      const int sc = flip_cols ? img.width - 1 - c : c;
      std::copy_n(img.px(sr, sc), img.channels, out.px(r, c));
    }
  }
  return out;
}

// Counterclockwise quarter turns as exact permutations.
Raster rotate_quarter(const Raster& img, int quarter_turns) {
  const int q = ((quarter_turns % 4) + 4) % 4;
  if (q == 0) return img;
  const int w = img.width, h = img.height;
  Raster out(q == 2 ? w : h, q == 2 ? h : w, img.channels);
  for (int r = 0; r < out.height; ++r) {
    for (int c = 0; c < out.width; ++c) {
      int sr = 0, sc = 0;
      if (q == 1) {
        sr = c;
        sc = w - 1 - r;
      } else if (q == 2) {
        sr = h - 1 - r;
        sc = w - 1 - c;
      } else {
        sr = h - 1 - c;
        sc = r;
      }
      std::copy_n(img.px(sr, sc), img.channels, out.px(r, c));
    }
  }
  return out;
}

// Bilinear sample with edge clamping; caller handles out-of-frame points.
void bilinear(const Raster& img, double y, double x, double* dst) {
  y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  const int y0 = static_cast<int>(std::floor(y)), x0 = static_cast<int>(std::floor(x));
  const int y1 = std::min(y0 + 1, img.height - 1), x1 = std::min(x0 + 1, img.width - 1);
  const double fy = y - y0, fx = x - x0;
  for (int ch = 0; ch < img.channels; ++ch) {
    const double top = img.px(y0, x0)[ch] * (1 - fx) + img.px(y0, x1)[ch] * fx;
    const double bottom = img.px(y1, x0)[ch] * (1 - fx) + img.px(y1, x1)[ch] * fx;
    dst[ch] = top * (1 - fy) + bottom * fy;
  }
}

Raster rotate(const Raster& img, int degrees) {
  if (degrees % 90 == 0) return rotate_quarter(img, degrees / 90);
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta), sn = std::sin(theta);
  const int w = img.width, h = img.height;
  // Enlarged canvas holding the whole rotated frame; uncovered area stays black.
  const int out_w = static_cast<int>(std::ceil(std::abs(w * cs) + std::abs(h * sn) - 1e-9));
  const int out_h = static_cast<int>(std::ceil(std::abs(w * sn) + std::abs(h * cs) - 1e-9));
  Raster out(out_w, out_h, img.channels, 0.0);
  const double icx = (w - 1) / 2.0, icy = (h - 1) / 2.0;
  const double ocx = (out_w - 1) / 2.0, ocy = (out_h - 1) / 2.0;
  for (int r = 0; r < out_h; ++r) {
    for (int c = 0; c < out_w; ++c) {
      const double dx = c - ocx, dy = r - ocy;
      // Inverse of the counterclockwise (y-down) rotation.
      const double sx = dx * cs - dy * sn + icx;
      const double sy = dx * sn + dy * cs + icy;
      if (sx < -0.5 || sx > w - 0.5 || sy < -0.5 || sy > h - 0.5) continue;
      bilinear(img, sy, sx, out.px(r, c));
    }
  }
  return out;
}

Raster scale(const Raster& img, int percent) {
  const double factor = 1.0 + percent / 100.0;
  const int out_w = std::max(1, static_cast<int>(std::lround(img.width * factor)));
  const int out_h = std::max(1, static_cast<int>(std::lround(img.height * factor)));
  const double sx = static_cast<double>(img.width) / out_w, sy = static_cast<double>(img.height) / out_h;
  Raster out(out_w, out_h, img.channels);
  for (int r = 0; r < out_h; ++r) {
    for (int c = 0; c < out_w; ++c) bilinear(img, (r + 0.5) * sy - 0.5, (c + 0.5) * sx - 0.5, out.px(r, c));
  }
  return out;
}

Raster geometric(const Raster& img, const AttackSpec& spec) {
  switch (spec.kind) {
    case AttackKind::RandomSquare: return random_square(img, spec.seed);
    case AttackKind::GaussianBlur: return gaussian_blur(img, spec.value);
    case AttackKind::Rotation: return rotate(img, spec.value);
    case AttackKind::Mirror: return mirror(img, spec.axis);
    case AttackKind::Scale: return scale(img, spec.value);
    case AttackKind::Jpeg: break;
  }
  throw Error(ErrorCode::Spec, "not a raster attack");
}

char axis_char(MirrorAxis a) {
  switch (a) {
    case MirrorAxis::Horizontal: return 'H';
    case MirrorAxis::Vertical: return 'V';
    case MirrorAxis::Both: return 'B';
  }
  return 'H';
}

int parse_int(std::string_view s, std::string_view what) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  try {
    std::size_t used = 0;
    const int v = std::stoi(std::string(s), &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Spec, "bad " + std::string(what) + " parameter: " + std::string(s));
  }
}

}  // namespace

double blur_sigma(int kernel) { return 0.3 * ((kernel - 1) / 2.0 - 1.0) + 0.8; }

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::RandomSquare: return "random-square";
    case AttackKind::GaussianBlur: return "gaussian-blur";
    case AttackKind::Rotation: return "rotation";
    case AttackKind::Mirror: return "mirror";
    case AttackKind::Scale: return "scale";
    case AttackKind::Jpeg: return "jpeg";
  }
  return "unknown";
}

void AttackSpec::validate() const {
  auto one_of = [&](std::initializer_list<int> allowed) {
    return std::find(allowed.begin(), allowed.end(), value) != allowed.end();
  };
  bool ok = true;
  switch (kind) {
    case AttackKind::RandomSquare: ok = true; break;
    case AttackKind::GaussianBlur: ok = one_of({3, 9, 15}); break;
    case AttackKind::Rotation: ok = one_of({45, 90, 135, 180, 225, 270}); break;
    case AttackKind::Mirror: ok = true; break;
    case AttackKind::Scale: ok = one_of({50, -50}); break;
    case AttackKind::Jpeg: ok = one_of({1, 50, 100}); break;
  }
  if (!ok) throw Error(ErrorCode::Spec, "invalid parameter for " + std::string(ctfdct::to_string(kind)) + ": " +
                                            std::to_string(value));
}

AttackSpec AttackSpec::parse(std::string_view text, std::uint64_t seed) {
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  const auto param = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  AttackSpec spec;
  spec.seed = seed;
  if (name == "random-square") {
    spec.kind = AttackKind::RandomSquare;
  } else if (name == "gaussian-blur" || name == "blur") {
    spec.kind = AttackKind::GaussianBlur;
    spec.value = parse_int(param, "kernel");
  } else if (name == "rotation" || name == "rotate") {
    spec.kind = AttackKind::Rotation;
    spec.value = parse_int(param, "degrees");
  } else if (name == "mirror") {
    spec.kind = AttackKind::Mirror;
    if (param == "H") {
      spec.axis = MirrorAxis::Horizontal;
    } else if (param == "V") {
      spec.axis = MirrorAxis::Vertical;
    } else if (param == "B") {
      spec.axis = MirrorAxis::Both;
    } else {
      throw Error(ErrorCode::Spec, "mirror axis must be H, V or B");
    }
  } else if (name == "scale") {
    spec.kind = AttackKind::Scale;
    spec.value = parse_int(param, "percent");
  } else if (name == "jpeg") {
    spec.kind = AttackKind::Jpeg;
    spec.value = parse_int(param, "quality");
  } else {
    throw Error(ErrorCode::Spec, "unknown attack: " + std::string(text));
  }
  spec.validate();
  return spec;
}

std::string AttackSpec::parameter_string() const {
  switch (kind) {
    case AttackKind::RandomSquare: return "";
    case AttackKind::Mirror: return std::string(1, axis_char(axis));
    case AttackKind::Scale: return (value > 0 ? "+" : "") + std::to_string(value);
    default: return std::to_string(value);
  }
}

std::string AttackSpec::to_string() const {
  const auto p = parameter_string();
  return std::string(ctfdct::to_string(kind)) + (p.empty() ? "" : ":" + p);
}

std::string AttackSpec::tag() const {
  switch (kind) {
    case AttackKind::RandomSquare: return "square";
    case AttackKind::GaussianBlur: return "blur-k" + std::to_string(value);
    case AttackKind::Rotation: return "rot-" + std::to_string(value);
    case AttackKind::Mirror: return std::string("mirror-") + axis_char(axis);
    case AttackKind::Scale: return value > 0 ? "scale-up50" : "scale-down50";
    case AttackKind::Jpeg: return "jpeg-q" + std::to_string(value);
  }
  return "attack";
}

std::vector<AttackSpec> attack_grid(std::uint64_t seed) {
  std::vector<AttackSpec> grid;
  grid.push_back({AttackKind::RandomSquare, 0, MirrorAxis::Horizontal, seed});
  for (int k : {3, 9, 15}) grid.push_back({AttackKind::GaussianBlur, k, MirrorAxis::Horizontal, seed});
  for (int d : {45, 90, 135, 180, 225}) grid.push_back({AttackKind::Rotation, d, MirrorAxis::Horizontal, seed});
  for (auto a : {MirrorAxis::Horizontal, MirrorAxis::Vertical, MirrorAxis::Both}) {
    grid.push_back({AttackKind::Mirror, 0, a, seed});
  }
  for (int p : {50, -50}) grid.push_back({AttackKind::Scale, p, MirrorAxis::Horizontal, seed});
  for (int q : {1, 50, 100}) grid.push_back({AttackKind::Jpeg, q, MirrorAxis::Horizontal, seed});
  return grid;
}

LuminanceImage apply_attack(const LuminanceImage& img, const AttackSpec& spec) {
  spec.validate();
  if (spec.kind == AttackKind::Jpeg) {
    const auto bytes = encode_jpeg(img, spec.value);
    return to_luminance(decode_rgb_bytes(bytes), ChannelMode::Bt601);
  }
  return to_luminance_image(geometric(from_image(img), spec));
}

RgbImage apply_attack(const RgbImage& img, const AttackSpec& spec) {
  spec.validate();
  if (spec.kind == AttackKind::Jpeg) return decode_rgb_bytes(encode_jpeg(img, spec.value));
  return to_rgb_image(geometric(from_image(img), spec));
}

}  // namespace ctfdct
