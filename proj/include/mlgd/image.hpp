#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace mlgd {

inline constexpr int kStandardWidth = 48;
inline constexpr int kStandardHeight = 128;

/// Interleaved RGB image with channel values in [0, 1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // (y * width + x) * 3 + c

  RgbImage() = default;
  RgbImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  double& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  double at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

/// Bilinear resize to the standard 48x128 frame.
RgbImage standardize(const RgbImage& img);

/// Decodes an 8-bit image (PNG, JPEG, BMP, ...) and standardizes it.
RgbImage load_and_standardize(std::span<const std::uint8_t> image_bytes);
RgbImage load_and_standardize(const std::filesystem::path& path);

/// Writes an 8-bit PNG; values are clamped to [0, 1] and rounded.
void save_png(const std::filesystem::path& path, const RgbImage& img);

}  // namespace mlgd
