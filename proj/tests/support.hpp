#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "ctfdct/error.hpp"
#include "ctfdct/image_io.hpp"
#include "ctfdct/rng.hpp"

#include <unistd.h>

namespace testing {

// Error code thrown by f, or nullopt when it returns normally.
template <typename F>
std::optional<ctfdct::ErrorCode> error_of(F&& f) {
  try {
    f();
  } catch (const ctfdct::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ctfdct_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

inline void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

inline ctfdct::LuminanceImage random_image(ctfdct::Rng& rng, int w, int h, bool integer = false, double lo = 0.0,
                                           double hi = 255.0) {
  std::vector<double> px(static_cast<std::size_t>(w) * h);
  for (auto& v : px) {
    v = rng.uniform(lo, hi);
    if (integer) v = std::round(v);
  }
  return {w, h, std::move(px)};
}

inline ctfdct::RgbImage solid_rgb(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  ctfdct::RgbImage img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3)};
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = r;
    img.pixels[i + 1] = g;
    img.pixels[i + 2] = b;
  }
  return img;
}

}  // namespace testing
