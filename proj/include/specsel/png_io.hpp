#pragma once

// PNG decode/encode through libpng's simplified API. Color images come back
// as float RGB in [0,1]; grayscale masks as raw bytes.

#include <png.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "specsel/common.hpp"

namespace specsel {

struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;  // (y*width + x)*3 + c, c in {R,G,B}, values in [0,1]

  float at(std::size_t y, std::size_t x, std::size_t c) const {
    return values[(y * width + x) * 3 + c];
  }
  float& at(std::size_t y, std::size_t x, std::size_t c) {
    return values[(y * width + x) * 3 + c];
  }
};

struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> values;  // y*width + x
};

inline RgbImage read_rgb_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw Error(ErrorKind::io, "cannot decode " + path.string() + ": " + image.message);

  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, bytes.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::io, "cannot decode " + path.string() + ": " + message);
  }

  RgbImage out;
  out.height = image.height;
  out.width = image.width;
  out.values.resize(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i)
    out.values[i] = static_cast<float>(bytes[i]) / 255.0f;
  return out;
}

inline void write_rgb_png(const std::filesystem::path& path, const RgbImage& img) {
  if (img.height == 0 || img.width == 0)
    throw Error(ErrorKind::io, "refusing to write empty image " + path.string());
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }

  std::vector<std::uint8_t> bytes(img.values.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    float v = std::min(std::max(img.values[i], 0.0f), 1.0f);
    bytes[i] = static_cast<std::uint8_t>(v * 255.0f + 0.5f);
  }

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.format = PNG_FORMAT_RGB;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, bytes.data(), 0, nullptr))
    throw Error(ErrorKind::io, "cannot write " + path.string() + ": " + image.message);
}

inline GrayImage read_gray_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw Error(ErrorKind::io, "cannot decode " + path.string() + ": " + image.message);

  image.format = PNG_FORMAT_GRAY;
  GrayImage out;
  out.height = image.height;
  out.width = image.width;
  out.values.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.values.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::io, "cannot decode " + path.string() + ": " + message);
  }
  return out;
}

inline void write_gray_png(const std::filesystem::path& path, const GrayImage& img) {
  if (img.height == 0 || img.width == 0)
    throw Error(ErrorKind::io, "refusing to write empty image " + path.string());
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.format = PNG_FORMAT_GRAY;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.values.data(), 0, nullptr))
    throw Error(ErrorKind::io, "cannot write " + path.string() + ": " + image.message);
}

}  // namespace specsel
