#include "ctfdct/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "ctfdct/error.hpp"

namespace ctfdct {

namespace {

bool valid_sample(double v) { return std::isfinite(v) && v >= 0.0 && v <= 255.0; }

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::Io, "read failed: " + path.string());
  return bytes;
}

bool is_png(std::span<const std::uint8_t> b) {
  return b.size() >= 8 && png_sig_cmp(b.data(), 0, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::Format, std::string("png: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::Format, "png: " + msg);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silence(j_common_ptr, int) {}

// Corrupt-data warnings (premature EOF and the like) are fatal on decode.
void jpeg_strict_message(j_common_ptr cinfo, int level) {
  if (level < 0) jpeg_error_exit(cinfo);
}

// Plain C-style body: no objects with destructors live across setjmp.
bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, RgbImage& out, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_strict_message;
  if (setjmp(err.jump)) {
    std::snprintf(message, JMSG_LENGTH_MAX, "%s", err.message);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * out.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

bool encode_jpeg_raw(const std::uint8_t* pixels, int width, int height, int components, int quality,
                     unsigned char** buffer, unsigned long* size, char* message) {
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_silence;
  if (setjmp(err.jump)) {
    std::snprintf(message, JMSG_LENGTH_MAX, "%s", err.message);
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, buffer, size);
  cinfo.image_width = static_cast<JDIMENSION>(width);
  cinfo.image_height = static_cast<JDIMENSION>(height);
  cinfo.input_components = components;
  cinfo.in_color_space = components == 3 ? JCS_RGB : JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(width) * components;
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(pixels + cinfo.next_scanline * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

std::vector<std::uint8_t> encode_jpeg_bytes(const std::uint8_t* pixels, int width, int height,
                                            int components, int quality) {
  if (quality < 1 || quality > 100) throw Error(ErrorCode::Spec, "jpeg quality out of range");
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  char message[JMSG_LENGTH_MAX] = {};
  const bool ok = encode_jpeg_raw(pixels, width, height, components, quality, &buffer, &size, message);
  std::vector<std::uint8_t> out;
  if (ok) out.assign(buffer, buffer + size);
  std::free(buffer);
  if (!ok) throw Error(ErrorCode::Format, std::string("jpeg encode: ") + message);
  return out;
}

}  // namespace

LuminanceImage::LuminanceImage(int width, int height, std::vector<double> samples) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::Dimension, "image dimensions must be positive");
  if (samples.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::Shape, "sample count does not match width x height");
  }
  if (!std::all_of(samples.begin(), samples.end(), valid_sample)) {
    throw Error(ErrorCode::Numeric, "luminance samples must be finite and within [0, 255]");
  }
  plane_.width = width;
  plane_.height = height;
  plane_.samples = std::move(samples);
}

LuminanceImage::LuminanceImage(Plane plane)
    : LuminanceImage(plane.width, plane.height, std::move(plane.samples)) {}

LuminanceImage LuminanceImage::clamped(Plane plane) {
  for (double& v : plane.samples) {
    if (!std::isfinite(v)) throw Error(ErrorCode::Numeric, "non-finite sample");
    v = std::clamp(v, 0.0, 255.0);
  }
  return LuminanceImage(std::move(plane));
}

ChannelMode parse_channel_mode(std::string_view name) {
  if (name == "bt601") return ChannelMode::Bt601;
  if (name == "r") return ChannelMode::Red;
  if (name == "g") return ChannelMode::Green;
  if (name == "b") return ChannelMode::Blue;
  throw Error(ErrorCode::Usage, "unknown luminance mode: " + std::string(name));
}

std::string_view to_string(ChannelMode mode) {
  switch (mode) {
    case ChannelMode::Bt601: return "bt601";
    case ChannelMode::Red: return "r";
    case ChannelMode::Green: return "g";
    case ChannelMode::Blue: return "b";
  }
  return "bt601";
}

RgbImage decode_rgb_bytes(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_jpeg(bytes)) {
    RgbImage out;
    char message[JMSG_LENGTH_MAX] = {};
    if (!decode_jpeg_raw(bytes, out, message)) throw Error(ErrorCode::Format, std::string("jpeg: ") + message);
    return out;
  }
  throw Error(ErrorCode::Format, "unsupported image format (expected PNG or JPEG)");
}

RgbImage decode_rgb(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_rgb_bytes(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

LuminanceImage decode(const std::filesystem::path& path, ChannelMode mode) {
  return to_luminance(decode_rgb(path), mode);
}

LuminanceImage to_luminance(const RgbImage& rgb, ChannelMode mode) {
  std::vector<double> samples(static_cast<std::size_t>(rgb.width) * rgb.height);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int r = rgb.pixels[3 * i], g = rgb.pixels[3 * i + 1], b = rgb.pixels[3 * i + 2];
    switch (mode) {
      // Integer weights keep grey inputs exact (e.g. white stays 255).
      case ChannelMode::Bt601: samples[i] = (299.0 * r + 587.0 * g + 114.0 * b) / 1000.0; break;
      case ChannelMode::Red: samples[i] = r; break;
      case ChannelMode::Green: samples[i] = g; break;
      case ChannelMode::Blue: samples[i] = b; break;
    }
  }
  return LuminanceImage(rgb.width, rgb.height, std::move(samples));
}

RgbImage to_rgb(const LuminanceImage& img) {
  RgbImage out{img.width(), img.height(), {}};
  out.pixels.reserve(img.samples().size() * 3);
  for (double v : img.samples()) {
    const auto b = to_byte(v);
    out.pixels.insert(out.pixels.end(), {b, b, b});
  }
  return out;
}

std::vector<PixelBlock> tile(const LuminanceImage& img) {
  if (img.width() < 8 || img.height() < 8) {
    throw Error(ErrorCode::Dimension, "image must be at least 8x8 to tile");
  }
  const int rows = img.height() / 8, cols = img.width() / 8;
  std::vector<PixelBlock> blocks;
  blocks.reserve(static_cast<std::size_t>(rows) * cols);
  for (int br = 0; br < rows; ++br) {
    for (int bc = 0; bc < cols; ++bc) {
      PixelBlock block;
      block.block_row = br;
      block.block_col = bc;
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) block.values[r * 8 + c] = img.at(br * 8 + r, bc * 8 + c);
      }
      blocks.push_back(block);
    }
  }
  return blocks;
}

void write_png(const std::filesystem::path& path, const LuminanceImage& img) {
  std::vector<std::uint8_t> gray(img.samples().size());
  std::transform(img.samples().begin(), img.samples().end(), gray.begin(), to_byte);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, gray.data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, "png write failed: " + path.string() + ": " + image.message);
  }
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, "png write failed: " + path.string() + ": " + image.message);
  }
}

std::vector<std::uint8_t> encode_jpeg(const RgbImage& img, int quality) {
  return encode_jpeg_bytes(img.pixels.data(), img.width, img.height, 3, quality);
}

std::vector<std::uint8_t> encode_jpeg(const LuminanceImage& img, int quality) {
  std::vector<std::uint8_t> gray(img.samples().size());
  std::transform(img.samples().begin(), img.samples().end(), gray.begin(), to_byte);
  return encode_jpeg_bytes(gray.data(), img.width(), img.height(), 1, quality);
}

}  // namespace ctfdct
