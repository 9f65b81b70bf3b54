#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "moransac/errors.hpp"

namespace moransac {

/// Row-major single-channel 16-bit raster (raw depth units).
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;

  std::uint16_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint16_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  static DepthImage zeros(int width, int height);
};

/// Row-major 8-bit RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::array<std::uint8_t, 3>> pixels;

  const std::array<std::uint8_t, 3>& at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::array<std::uint8_t, 3>& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  static RgbImage zeros(int width, int height);
};

/// Row-major per-pixel label raster; -1 marks unlabeled pixels.
struct LabelImage {
  int width = 0;
  int height = 0;
  std::vector<int> pixels;

  int at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  static LabelImage filled(int width, int height, int value);
};

// PGM (P5) with maxval 65535 carries depth; per Netpbm, 16-bit samples are
// stored most significant byte first.
DepthImage read_depth_pgm(const std::filesystem::path& file);
void write_depth_pgm(const std::filesystem::path& file, const DepthImage& img);

// PPM (P6), maxval 255.
RgbImage read_rgb_ppm(const std::filesystem::path& file);
void write_rgb_ppm(const std::filesystem::path& file, const RgbImage& img);

// Labels ride in a 16-bit PGM: pixel value 0 means unlabeled, v > 0 means
// label v - 1.
LabelImage read_label_pgm(const std::filesystem::path& file);
void write_label_pgm(const std::filesystem::path& file, const LabelImage& img);

}  // namespace moransac
