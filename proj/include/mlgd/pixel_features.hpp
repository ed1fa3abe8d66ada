#pragma once

// Per-pixel feature channels: color moments, Schmid texture responses,
// binned gradient orientation, HSV and normalized rg chromaticity.

#include "mlgd/image.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mlgd {

enum class FeatureSet { kYcm, kSchmid, kYgoHsv, kYgoNrng };

inline constexpr FeatureSet kAllFeatureSets[] = {FeatureSet::kYcm, FeatureSet::kSchmid, FeatureSet::kYgoHsv,
                                                 FeatureSet::kYgoNrng};

std::string_view to_string(FeatureSet set);
FeatureSet parse_feature_set(std::string_view name);
/// Channel count of a set: 7, 13, 8, 7.
int channel_count(FeatureSet set);

/// The y-distance is either row/(H-1) or the raw row index.
enum class RowCoordinate { kNormalized, kAbsolute };

/// kAsPrinted uses cos(2 pi r tau / sigma); kClassical uses cos(pi r tau / sigma).
enum class SchmidVariant { kAsPrinted, kClassical };

struct PixelFeatureOptions {
  RowCoordinate row_coordinate = RowCoordinate::kNormalized;
  SchmidVariant schmid_variant = SchmidVariant::kAsPrinted;
  int moment_window = 5;
  int schmid_pool_block = 10;
};

using PixelMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// W x H x n tensor stored as (H*W) x n, pixel (x, y) in row y*W + x.
struct PixelFeatureMap {
  int width = 0;
  int height = 0;
  std::vector<FeatureSet> sets;  // one entry unless pixel-level fused
  PixelMatrix values;

  int channels() const { return static_cast<int>(values.cols()); }
  double at(int x, int y, int c) const { return values(static_cast<Eigen::Index>(y) * width + x, c); }
};

/// A channel-major planar map used for the intermediate per-channel stages.
struct ChannelStack {
  int width = 0;
  int height = 0;
  std::vector<std::vector<double>> planes;

  double at(int x, int y, int c) const { return planes[c][static_cast<std::size_t>(y) * width + x]; }
};

class SchmidFilterBank {
 public:
  struct Params {
    double sigma;
    double tau;
  };

  explicit SchmidFilterBank(SchmidVariant variant = SchmidVariant::kAsPrinted);

  const std::vector<Params>& params() const { return params_; }
  /// Square kernels of radius ceil(3 sigma), zero-sum and unit L2 norm.
  const std::vector<Eigen::MatrixXd>& kernels() const { return kernels_; }
  SchmidVariant variant() const { return variant_; }

 private:
  SchmidVariant variant_;
  std::vector<Params> params_;
  std::vector<Eigen::MatrixXd> kernels_;
};

/// The 13 (sigma, tau) pairs of the texture bank.
const std::vector<SchmidFilterBank::Params>& schmid_parameters();

SchmidFilterBank build_schmid_bank(SchmidVariant variant = SchmidVariant::kAsPrinted);

/// 0.299 R + 0.587 G + 0.114 B, row-major.
std::vector<double> luminance(const RgbImage& img);

/// Mean and sample std of R, G, B over a clamped window:
/// [mean R, std R, mean G, std G, mean B, std B].
ChannelStack color_moments(const RgbImage& img, int window = 5);

/// Luminance convolved with each kernel (reflect padding), then averaged over
/// non-overlapping pool_block squares and broadcast back to pixels.
/// pool_block <= 1 returns the dense responses.
ChannelStack schmid_responses(const RgbImage& img, const SchmidFilterBank& bank, int pool_block = 10);
ChannelStack schmid_responses(const RgbImage& img);

/// Sobel magnitude hard-assigned to one of four orientation bins over [0, 180).
/// Orientation is atan2(gy, gx) folded into [0, 180), so a vertical step edge
/// (intensity changing along x) lands in bin 0.
ChannelStack gradient_orientation(const RgbImage& img);

/// Hexcone HSV with H scaled to [0, 1).
ChannelStack hsv_channels(const RgbImage& img);

/// nR = R/(R+G+B), nG = G/(R+G+B); black maps to (1/3, 1/3).
ChannelStack nrng_channels(const RgbImage& img);

/// Assembles the channel layout of one feature set:
/// YCM [y, mean R, std R, mean G, std G, mean B, std B]; SCHMID 13 responses;
/// YGOHSV [y, 4 gradient bins, H, S, V]; YGOnRnG [y, 4 gradient bins, nR, nG].
PixelFeatureMap build_feature_map(const RgbImage& img, FeatureSet set, const PixelFeatureOptions& options = {});

/// Pixel-level fusion: union of the channels of `sets` with shared channels
/// (y, gradient bins) included once.
PixelFeatureMap build_fused_feature_map(const RgbImage& img, const std::vector<FeatureSet>& sets,
                                        const PixelFeatureOptions& options = {});

}  // namespace mlgd
