#include "mlgd/pixel_features.hpp"

#include "mlgd/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace mlgd {
namespace {

// Symmetric reflection (edge sample repeated); works for any offset.
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

ChannelStack make_stack(const RgbImage& img, int channels) {
  ChannelStack s;
  s.width = img.width;
  s.height = img.height;
  s.planes.assign(channels, std::vector<double>(static_cast<std::size_t>(img.width) * img.height, 0.0));
  return s;
}

std::vector<double> pad_reflect(const std::vector<double>& plane, int width, int height, int radius) {
  const int pw = width + 2 * radius;
  const int ph = height + 2 * radius;
  std::vector<double> padded(static_cast<std::size_t>(pw) * ph);
  for (int y = 0; y < ph; ++y) {
    const int sy = reflect_index(y - radius, height);
    for (int x = 0; x < pw; ++x) {
      padded[static_cast<std::size_t>(y) * pw + x] = plane[static_cast<std::size_t>(sy) * width + reflect_index(x - radius, width)];
    }
  }
  return padded;
}

// Correlation of a reflect-padded plane with a (2r+1)^2 kernel.
std::vector<double> filter_plane(const std::vector<double>& padded, int padded_width, int width, int height,
                                 int pad, const Eigen::MatrixXd& kernel) {
  const int r = static_cast<int>(kernel.rows() / 2);
  std::vector<double> out(static_cast<std::size_t>(width) * height, 0.0);
  for (int y = 0; y < height; ++y) {
    double* dst = &out[static_cast<std::size_t>(y) * width];
    for (int ky = -r; ky <= r; ++ky) {
      const double* src_row = &padded[static_cast<std::size_t>(y + pad + ky) * padded_width + pad];
      for (int kx = -r; kx <= r; ++kx) {
        const double w = kernel(ky + r, kx + r);
        const double* src = src_row + kx;
        for (int x = 0; x < width; ++x) dst[x] += w * src[x];
      }
    }
  }
  return out;
}

void block_average(std::vector<double>& plane, int width, int height, int block) {
  for (int by = 0; by < height; by += block) {
    const int ey = std::min(by + block, height);
    for (int bx = 0; bx < width; bx += block) {
      const int ex = std::min(bx + block, width);
      double sum = 0.0;
      for (int y = by; y < ey; ++y)
        for (int x = bx; x < ex; ++x) sum += plane[static_cast<std::size_t>(y) * width + x];
      const double mean = sum / static_cast<double>((ey - by) * (ex - bx));
      for (int y = by; y < ey; ++y)
        for (int x = bx; x < ex; ++x) plane[static_cast<std::size_t>(y) * width + x] = mean;
    }
  }
}

const SchmidFilterBank& shared_bank(SchmidVariant variant) {
  static const SchmidFilterBank printed(SchmidVariant::kAsPrinted);
  static const SchmidFilterBank classical(SchmidVariant::kClassical);
  return variant == SchmidVariant::kAsPrinted ? printed : classical;
}

double row_coordinate(int y, int height, RowCoordinate mode) {
  if (mode == RowCoordinate::kAbsolute) return static_cast<double>(y);
  return height > 1 ? static_cast<double>(y) / static_cast<double>(height - 1) : 0.0;
}

}  // namespace

std::string_view to_string(FeatureSet set) {
  switch (set) {
    case FeatureSet::kYcm: return "ycm";
    case FeatureSet::kSchmid: return "schmid";
    case FeatureSet::kYgoHsv: return "ygohsv";
    case FeatureSet::kYgoNrng: return "ygonrng";
  }
  throw Error(ErrorKind::kConfiguration, "unknown feature set");
}

FeatureSet parse_feature_set(std::string_view name) {
  for (FeatureSet s : kAllFeatureSets) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorKind::kConfiguration, "unknown feature set '" + std::string(name) + "'");
}

int channel_count(FeatureSet set) {
  switch (set) {
    case FeatureSet::kYcm: return 7;
    case FeatureSet::kSchmid: return 13;
    case FeatureSet::kYgoHsv: return 8;
    case FeatureSet::kYgoNrng: return 7;
  }
  throw Error(ErrorKind::kConfiguration, "unknown feature set");
}

const std::vector<SchmidFilterBank::Params>& schmid_parameters() {
  static const std::vector<SchmidFilterBank::Params> params = {
      {2, 1}, {4, 1}, {4, 2}, {6, 1}, {6, 2}, {6, 3}, {8, 1}, {8, 2}, {8, 3}, {10, 1}, {10, 2}, {10, 3}, {10, 4}};
  return params;
}

SchmidFilterBank::SchmidFilterBank(SchmidVariant variant) : variant_(variant), params_(schmid_parameters()) {
  const double freq_scale = variant == SchmidVariant::kAsPrinted ? 2.0 * std::numbers::pi : std::numbers::pi;
  kernels_.reserve(params_.size());
  for (const auto& [sigma, tau] : params_) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int size = 2 * radius + 1;
    Eigen::MatrixXd k(size, size);
    for (int y = -radius; y <= radius; ++y) {
      for (int x = -radius; x <= radius; ++x) {
        const double r = std::hypot(static_cast<double>(x), static_cast<double>(y));
        k(y + radius, x + radius) = std::cos(freq_scale * r * tau / sigma) * std::exp(-r * r / (2.0 * sigma * sigma));
      }
    }
    // F0 is the constant offset that removes the DC component.
    k.array() -= k.mean();
    k /= k.norm();
    k.array() -= k.mean();
    kernels_.push_back(std::move(k));
  }
}

SchmidFilterBank build_schmid_bank(SchmidVariant variant) { return SchmidFilterBank(variant); }

std::vector<double> luminance(const RgbImage& img) {
  std::vector<double> out(static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out[static_cast<std::size_t>(y) * img.width + x] =
          0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
  return out;
}

ChannelStack color_moments(const RgbImage& img, int window) {
  if (window < 1) throw Error(ErrorKind::kConfiguration, "moment window must be positive");
  ChannelStack out = make_stack(img, 6);
  const int half = window / 2;
  for (int y = 0; y < img.height; ++y) {
    const int y0 = std::max(0, y - half), y1 = std::min(img.height - 1, y - half + window - 1);
    for (int x = 0; x < img.width; ++x) {
      const int x0 = std::max(0, x - half), x1 = std::min(img.width - 1, x - half + window - 1);
      const double count = static_cast<double>((y1 - y0 + 1) * (x1 - x0 + 1));
      const auto idx = static_cast<std::size_t>(y) * img.width + x;
      for (int c = 0; c < 3; ++c) {
        // Shifted by the first sample so a constant window gives an exact mean.
        const double shift = img.at(x0, y0, c);
        double sum = 0.0;
        for (int wy = y0; wy <= y1; ++wy)
          for (int wx = x0; wx <= x1; ++wx) sum += img.at(wx, wy, c) - shift;
        const double mean = shift + sum / count;
        double ss = 0.0;
        for (int wy = y0; wy <= y1; ++wy)
          for (int wx = x0; wx <= x1; ++wx) {
            const double d = img.at(wx, wy, c) - mean;
            ss += d * d;
          }
        out.planes[2 * c][idx] = mean;
        out.planes[2 * c + 1][idx] = count > 1.0 ? std::sqrt(ss / (count - 1.0)) : 0.0;
      }
    }
  }
  return out;
}

ChannelStack schmid_responses(const RgbImage& img, const SchmidFilterBank& bank, int pool_block) {
  ChannelStack out = make_stack(img, static_cast<int>(bank.kernels().size()));
  int pad = 0;
  for (const auto& k : bank.kernels()) pad = std::max(pad, static_cast<int>(k.rows() / 2));
  const auto padded = pad_reflect(luminance(img), img.width, img.height, pad);
  const int padded_width = img.width + 2 * pad;
  for (std::size_t i = 0; i < bank.kernels().size(); ++i) {
    out.planes[i] = filter_plane(padded, padded_width, img.width, img.height, pad, bank.kernels()[i]);
    if (pool_block > 1) block_average(out.planes[i], img.width, img.height, pool_block);
  }
  return out;
}

ChannelStack schmid_responses(const RgbImage& img) {
  return schmid_responses(img, shared_bank(SchmidVariant::kAsPrinted));
}

ChannelStack gradient_orientation(const RgbImage& img) {
  ChannelStack out = make_stack(img, 4);
  const auto lum = luminance(img);
  const auto at = [&](int x, int y) {
    return lum[static_cast<std::size_t>(reflect_index(y, img.height)) * img.width + reflect_index(x, img.width)];
  };
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
      const double gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
      const double magnitude = std::hypot(gx, gy);
      if (magnitude == 0.0) continue;
      double degrees = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (degrees < 0.0) degrees += 180.0;
      if (degrees >= 180.0) degrees -= 180.0;
      const int bin = std::min(3, static_cast<int>(degrees / 45.0));
      out.planes[bin][static_cast<std::size_t>(y) * img.width + x] = magnitude;
    }
  }
  return out;
}

ChannelStack hsv_channels(const RgbImage& img) {
  ChannelStack out = make_stack(img, 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double r = img.at(x, y, 0), g = img.at(x, y, 1), b = img.at(x, y, 2);
      const double hi = std::max({r, g, b});
      const double lo = std::min({r, g, b});
      const double chroma = hi - lo;
      double h = 0.0;
      if (chroma > 0.0) {
        if (hi == r) {
          h = (g - b) / chroma;
          if (h < 0.0) h += 6.0;
        } else if (hi == g) {
          h = (b - r) / chroma + 2.0;
        } else {
          h = (r - g) / chroma + 4.0;
        }
        h /= 6.0;
      }
      const auto idx = static_cast<std::size_t>(y) * img.width + x;
      out.planes[0][idx] = h;
      out.planes[1][idx] = hi > 0.0 ? chroma / hi : 0.0;
      out.planes[2][idx] = hi;
    }
  }
  return out;
}

ChannelStack nrng_channels(const RgbImage& img) {
  ChannelStack out = make_stack(img, 2);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double r = img.at(x, y, 0), g = img.at(x, y, 1), b = img.at(x, y, 2);
      const double sum = r + g + b;
      const auto idx = static_cast<std::size_t>(y) * img.width + x;
      out.planes[0][idx] = sum > 0.0 ? r / sum : 1.0 / 3.0;
      out.planes[1][idx] = sum > 0.0 ? g / sum : 1.0 / 3.0;
    }
  }
  return out;
}

namespace {

struct ChannelPlan {
  bool y = false;
  bool moments = false;
  bool schmid = false;
  bool gradient = false;
  bool hsv = false;
  bool nrng = false;
};

void add_set(ChannelPlan& plan, FeatureSet set) {
  switch (set) {
    case FeatureSet::kYcm: plan.y = plan.moments = true; return;
    case FeatureSet::kSchmid: plan.schmid = true; return;
    case FeatureSet::kYgoHsv: plan.y = plan.gradient = plan.hsv = true; return;
    case FeatureSet::kYgoNrng: plan.y = plan.gradient = plan.nrng = true; return;
  }
  throw Error(ErrorKind::kConfiguration, "unknown feature set");
}

PixelFeatureMap assemble(const RgbImage& img, const ChannelPlan& plan, const PixelFeatureOptions& options) {
  if (img.width <= 0 || img.height <= 0) throw Error(ErrorKind::kDegenerateInput, "image has zero area");
  std::vector<ChannelStack> parts;
  if (plan.moments) parts.push_back(color_moments(img, options.moment_window));
  if (plan.schmid) parts.push_back(schmid_responses(img, shared_bank(options.schmid_variant), options.schmid_pool_block));
  if (plan.gradient) parts.push_back(gradient_orientation(img));
  if (plan.hsv) parts.push_back(hsv_channels(img));
  if (plan.nrng) parts.push_back(nrng_channels(img));

  int n = plan.y ? 1 : 0;
  for (const auto& p : parts) n += static_cast<int>(p.planes.size());

  PixelFeatureMap map;
  map.width = img.width;
  map.height = img.height;
  map.values.resize(static_cast<Eigen::Index>(img.width) * img.height, n);
  for (int y = 0; y < img.height; ++y) {
    const double yc = row_coordinate(y, img.height, options.row_coordinate);
    for (int x = 0; x < img.width; ++x) {
      const auto idx = static_cast<std::size_t>(y) * img.width + x;
      Eigen::Index c = 0;
      if (plan.y) map.values(static_cast<Eigen::Index>(idx), c++) = yc;
      for (const auto& p : parts)
        for (const auto& plane : p.planes) map.values(static_cast<Eigen::Index>(idx), c++) = plane[idx];
    }
  }
  return map;
}

}  // namespace

PixelFeatureMap build_feature_map(const RgbImage& img, FeatureSet set, const PixelFeatureOptions& options) {
  ChannelPlan plan;
  add_set(plan, set);
  PixelFeatureMap map = assemble(img, plan, options);
  map.sets = {set};
  return map;
}

PixelFeatureMap build_fused_feature_map(const RgbImage& img, const std::vector<FeatureSet>& sets,
                                        const PixelFeatureOptions& options) {
  if (sets.empty()) throw Error(ErrorKind::kConfiguration, "no feature sets selected");
  ChannelPlan plan;
  for (FeatureSet s : sets) add_set(plan, s);
  PixelFeatureMap map = assemble(img, plan, options);
  map.sets = sets;
  return map;
}

}  // namespace mlgd
