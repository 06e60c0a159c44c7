#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace ctfdct {

// Row-major real raster with no range constraint. Used for intermediate
// results (amplified fields, spectra) before they are rendered.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> samples;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0)
      : width(w), height(h), samples(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int row, int col) { return samples[static_cast<std::size_t>(row) * width + col]; }
  double at(int row, int col) const { return samples[static_cast<std::size_t>(row) * width + col]; }

  friend bool operator==(const Plane&, const Plane&) = default;
};

// Single-channel intensity image; every sample is finite and in [0, 255].
class LuminanceImage {
 public:
  LuminanceImage() = default;
  LuminanceImage(int width, int height, std::vector<double> samples);
  explicit LuminanceImage(Plane plane);

  // Clamps to [0, 255]; non-finite samples are rejected.
  static LuminanceImage clamped(Plane plane);

  int width() const { return plane_.width; }
  int height() const { return plane_.height; }
  std::span<const double> samples() const { return plane_.samples; }
  double at(int row, int col) const { return plane_.at(row, col); }
  const Plane& plane() const { return plane_; }

  friend bool operator==(const LuminanceImage&, const LuminanceImage&) = default;

 private:
  Plane plane_;
};

// Interleaved 8-bit RGB as decoded from disk.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t* px(int row, int col) { return &pixels[3 * (static_cast<std::size_t>(row) * width + col)]; }
  const std::uint8_t* px(int row, int col) const {
    return &pixels[3 * (static_cast<std::size_t>(row) * width + col)];
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

enum class ChannelMode { Bt601, Red, Green, Blue };

ChannelMode parse_channel_mode(std::string_view name);
std::string_view to_string(ChannelMode mode);

struct PixelBlock {
  std::array<double, 64> values{};  // row-major 8x8
  int block_row = 0;
  int block_col = 0;
};

RgbImage decode_rgb(const std::filesystem::path& path);
RgbImage decode_rgb_bytes(std::span<const std::uint8_t> bytes);
LuminanceImage decode(const std::filesystem::path& path, ChannelMode mode = ChannelMode::Bt601);

LuminanceImage to_luminance(const RgbImage& rgb, ChannelMode mode = ChannelMode::Bt601);
// Replicates the luminance into three channels, rounding to 8 bits.
RgbImage to_rgb(const LuminanceImage& img);

// floor(w/8) x floor(h/8) blocks, row-major; remainders are dropped.
std::vector<PixelBlock> tile(const LuminanceImage& img);

// Samples are rounded to the nearest integer.
void write_png(const std::filesystem::path& path, const LuminanceImage& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);

std::vector<std::uint8_t> encode_jpeg(const RgbImage& img, int quality);
std::vector<std::uint8_t> encode_jpeg(const LuminanceImage& img, int quality);

}  // namespace ctfdct
