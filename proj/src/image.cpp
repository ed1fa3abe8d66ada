#include "mlgd/image.hpp"

#include "mlgd/error.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

namespace mlgd {
namespace {

RgbImage from_mat(const cv::Mat& rgb64) {
  RgbImage out(rgb64.cols, rgb64.rows);
  for (int y = 0; y < rgb64.rows; ++y) {
    const auto* row = rgb64.ptr<cv::Vec3d>(y);
    for (int x = 0; x < rgb64.cols; ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = std::clamp(row[x][c], 0.0, 1.0);
    }
  }
  return out;
}

cv::Mat to_mat(const RgbImage& img) {
  cv::Mat m(img.height, img.width, CV_64FC3);
  for (int y = 0; y < img.height; ++y) {
    auto* row = m.ptr<cv::Vec3d>(y);
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) row[x][c] = img.at(x, y, c);
    }
  }
  return m;
}

}  // namespace

RgbImage standardize(const RgbImage& img) {
  if (img.width <= 0 || img.height <= 0 ||
      img.data.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw Error(ErrorKind::kDegenerateInput, "image has zero area");
  }
  if (img.width == kStandardWidth && img.height == kStandardHeight) return img;
  cv::Mat resized;
  cv::resize(to_mat(img), resized, cv::Size(kStandardWidth, kStandardHeight), 0, 0, cv::INTER_LINEAR);
  return from_mat(resized);
}

RgbImage load_and_standardize(std::span<const std::uint8_t> image_bytes) {
  if (image_bytes.empty()) throw Error(ErrorKind::kFormat, "empty image buffer");
  const cv::Mat raw(1, static_cast<int>(image_bytes.size()), CV_8UC1,
                    const_cast<std::uint8_t*>(image_bytes.data()));
  cv::Mat bgr = cv::imdecode(raw, cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error(ErrorKind::kFormat, "undecodable image data");
  if (bgr.depth() != CV_8U) throw Error(ErrorKind::kFormat, "only 8-bit images are supported");
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  rgb.convertTo(rgb, CV_64FC3, 1.0 / 255.0);
  return standardize(from_mat(rgb));
}

RgbImage load_and_standardize(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open image " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return load_and_standardize(std::span<const std::uint8_t>(bytes));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_png(const std::filesystem::path& path, const RgbImage& img) {
  cv::Mat bgr(img.height, img.width, CV_8UC3);
  for (int y = 0; y < img.height; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(img.at(x, y, c), 0.0, 1.0);
        row[x][2 - c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  if (!cv::imwrite(path.string(), bgr)) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

}  // namespace mlgd
