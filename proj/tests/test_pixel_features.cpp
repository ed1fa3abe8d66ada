#include "mlgd/pixel_features.hpp"

#include "test_support.hpp"

#include <cmath>
#include <numbers>

namespace mlgd {
namespace {

using testing::random_image;

// Mirror with the edge sample repeated: -1 -> 0, n -> n - 1.
int mirror(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}

double lum(const RgbImage& img, int x, int y) {
  return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
}

TEST(FeatureSets, ChannelCountsAndNames) {
  EXPECT_EQ(channel_count(FeatureSet::kYcm), 7);
  EXPECT_EQ(channel_count(FeatureSet::kSchmid), 13);
  EXPECT_EQ(channel_count(FeatureSet::kYgoHsv), 8);
  EXPECT_EQ(channel_count(FeatureSet::kYgoNrng), 7);
  for (FeatureSet s : kAllFeatureSets) EXPECT_EQ(parse_feature_set(to_string(s)), s);
  EXPECT_MLGD_ERROR(parse_feature_set("lbp"), ErrorKind::kConfiguration);
}

TEST(ColorMoments, MatchBruteForceClampedWindow) {
  std::mt19937_64 rng(1);
  const RgbImage img = random_image(rng, 17, 13);
  const ChannelStack m = color_moments(img, 5);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) {
        std::vector<double> window;
        for (int dy = -2; dy <= 2; ++dy)
          for (int dx = -2; dx <= 2; ++dx) {
            const int wx = x + dx, wy = y + dy;
            if (wx >= 0 && wx < img.width && wy >= 0 && wy < img.height) window.push_back(img.at(wx, wy, c));
          }
        double mean = 0.0;
        for (double v : window) mean += v;
        mean /= static_cast<double>(window.size());
        double ss = 0.0;
        for (double v : window) ss += (v - mean) * (v - mean);
        ASSERT_NEAR(m.at(x, y, 2 * c), mean, 1e-13);
        ASSERT_NEAR(m.at(x, y, 2 * c + 1), std::sqrt(ss / static_cast<double>(window.size() - 1)), 1e-13);
      }
}

TEST(ColorMoments, ConstantImageHasZeroSpread) {
  const RgbImage img(10, 10, 0.4);
  const ChannelStack m = color_moments(img);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(m.at(3, 7, 2 * c), 0.4, 1e-15);
    EXPECT_EQ(m.at(3, 7, 2 * c + 1), 0.0);
  }
}

TEST(SchmidBank, ThirteenPairsWithExpectedRadii) {
  const auto& params = schmid_parameters();
  ASSERT_EQ(params.size(), 13u);
  EXPECT_EQ(params.front().sigma, 2.0);
  EXPECT_EQ(params.back().sigma, 10.0);
  EXPECT_EQ(params.back().tau, 4.0);
  const SchmidFilterBank bank;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto radius = static_cast<Eigen::Index>(std::ceil(3.0 * params[i].sigma));
    EXPECT_EQ(bank.kernels()[i].rows(), 2 * radius + 1);
    EXPECT_EQ(bank.kernels()[i].cols(), 2 * radius + 1);
  }
}

TEST(SchmidBank, KernelsAreZeroMeanUnitNormAndRadial) {
  for (auto variant : {SchmidVariant::kAsPrinted, SchmidVariant::kClassical}) {
    const SchmidFilterBank bank(variant);
    for (const auto& k : bank.kernels()) {
      EXPECT_LE(std::abs(k.sum()), 1e-10);
      EXPECT_NEAR(k.norm(), 1.0, 1e-10);
      EXPECT_LE((k - k.transpose()).norm(), 1e-14);
      EXPECT_LE((k - k.colwise().reverse()).norm(), 1e-14);
    }
  }
}

TEST(SchmidBank, FirstKernelTapsFromClosedForm) {
  // sigma = 2, tau = 1 on a 13 x 13 support.
  Eigen::MatrixXd raw(13, 13);
  for (int y = -6; y <= 6; ++y)
    for (int x = -6; x <= 6; ++x) {
      const double r = std::sqrt(double(x * x + y * y));
      raw(y + 6, x + 6) = std::cos(2.0 * std::numbers::pi * r / 2.0) * std::exp(-r * r / 8.0);
    }
  const Eigen::MatrixXd centered = raw.array() - raw.mean();
  const Eigen::MatrixXd expected = centered / centered.norm();
  const SchmidFilterBank bank;
  const auto& k = bank.kernels().front();
  EXPECT_NEAR(k(6, 6), expected(6, 6), 1e-12);
  EXPECT_NEAR(k(6, 8), expected(6, 8), 1e-12);
  EXPECT_NEAR(k(0, 0), expected(0, 0), 1e-12);
}

TEST(SchmidBank, VariantsDiffer) {
  const SchmidFilterBank printed(SchmidVariant::kAsPrinted), classical(SchmidVariant::kClassical);
  const auto& a = printed.kernels()[4];
  const auto& b = classical.kernels()[4];
  EXPECT_GT((a - b).norm(), 1e-3);
}

TEST(SchmidResponses, ConstantImageGivesZero) {
  for (double level : {0.0, 0.37, 1.0}) {
    const ChannelStack r = schmid_responses(RgbImage(48, 128, level), SchmidFilterBank(), 1);
    for (const auto& plane : r.planes)
      for (double v : plane) ASSERT_LE(std::abs(v), 1e-12);
  }
}

TEST(SchmidResponses, DenseResponseIsReflectPaddedCorrelation) {
  std::mt19937_64 rng(3);
  const RgbImage img = random_image(rng, 20, 24);
  const SchmidFilterBank bank;
  const ChannelStack dense = schmid_responses(img, bank, 1);
  for (std::size_t f : {std::size_t{0}, std::size_t{2}}) {
    const auto& k = bank.kernels()[f];
    const int r = static_cast<int>(k.rows() / 2);
    for (auto [x, y] : {std::pair{0, 0}, std::pair{10, 12}, std::pair{19, 23}}) {
      double sum = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) sum += k(dy + r, dx + r) * lum(img, mirror(x + dx, 20), mirror(y + dy, 24));
      EXPECT_NEAR(dense.at(x, y, static_cast<int>(f)), sum, 1e-12);
    }
  }
}

TEST(SchmidResponses, PoolingAveragesBlocks) {
  std::mt19937_64 rng(5);
  const RgbImage img = random_image(rng, 48, 128);
  const SchmidFilterBank bank;
  const ChannelStack dense = schmid_responses(img, bank, 1);
  const ChannelStack pooled = schmid_responses(img, bank, 10);
  for (auto [bx, by] : {std::pair{0, 0}, std::pair{10, 60}, std::pair{40, 120}}) {
    const int ex = std::min(bx + 10, 48), ey = std::min(by + 10, 128);
    double sum = 0.0;
    for (int y = by; y < ey; ++y)
      for (int x = bx; x < ex; ++x) sum += dense.at(x, y, 3);
    const double mean = sum / ((ex - bx) * (ey - by));
    EXPECT_NEAR(pooled.at(bx, by, 3), mean, 1e-12);
    EXPECT_NEAR(pooled.at(ex - 1, ey - 1, 3), mean, 1e-12);
  }
}

TEST(Gradient, VerticalEdgeLandsInFirstBin) {
  RgbImage img(12, 8, 0.0);
  for (int y = 0; y < 8; ++y)
    for (int x = 6; x < 12; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = 1.0;
  const ChannelStack g = gradient_orientation(img);
  EXPECT_NEAR(g.at(5, 4, 0), 4.0, 1e-12);
  EXPECT_NEAR(g.at(6, 4, 0), 4.0, 1e-12);
  for (int b = 1; b < 4; ++b) EXPECT_EQ(g.at(5, 4, b), 0.0);
  EXPECT_EQ(g.at(2, 4, 0), 0.0);
}

TEST(Gradient, HorizontalEdgeLandsInThirdBin) {
  RgbImage img(8, 12, 0.0);
  for (int y = 6; y < 12; ++y)
    for (int x = 0; x < 8; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = 0.5;
  const ChannelStack g = gradient_orientation(img);
  EXPECT_NEAR(g.at(3, 6, 2), 2.0, 1e-12);
  EXPECT_EQ(g.at(3, 6, 0), 0.0);
  EXPECT_EQ(g.at(3, 6, 1), 0.0);
}

TEST(Gradient, DiagonalEdgeBins) {
  // Intensity increasing along (1, 1): angle 45 degrees.
  RgbImage img(16, 16, 0.0);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = (x + y) / 30.0;
  const ChannelStack g = gradient_orientation(img);
  EXPECT_GT(g.at(8, 8, 1), 0.0);
  EXPECT_EQ(g.at(8, 8, 0), 0.0);
  // Increasing along (-1, 1): 135 degrees.
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = (15 - x + y) / 30.0;
  EXPECT_GT(gradient_orientation(img).at(8, 8, 3), 0.0);
}

TEST(Hsv, PrimaryColorsAndGray) {
  RgbImage img(4, 1);
  const double colors[4][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.5, 0.5, 0.5}};
  for (int x = 0; x < 4; ++x)
    for (int c = 0; c < 3; ++c) img.at(x, 0, c) = colors[x][c];
  const ChannelStack h = hsv_channels(img);
  EXPECT_DOUBLE_EQ(h.at(0, 0, 0), 0.0);
  EXPECT_NEAR(h.at(1, 0, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(h.at(2, 0, 0), 2.0 / 3.0, 1e-15);
  for (int x = 0; x < 3; ++x) {
    EXPECT_DOUBLE_EQ(h.at(x, 0, 1), 1.0);
    EXPECT_DOUBLE_EQ(h.at(x, 0, 2), 1.0);
  }
  EXPECT_DOUBLE_EQ(h.at(3, 0, 1), 0.0);
  EXPECT_DOUBLE_EQ(h.at(3, 0, 2), 0.5);
}

TEST(Hsv, HueInUnitInterval) {
  std::mt19937_64 rng(7);
  const ChannelStack h = hsv_channels(random_image(rng, 30, 30));
  for (double v : h.planes[0]) {
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(Nrng, ScaleInvariantAndBlackIsNeutral) {
  std::mt19937_64 rng(11);
  RgbImage img = random_image(rng, 9, 9);
  RgbImage dim = img;
  for (auto& v : dim.data) v *= 0.3;
  img.at(0, 0, 0) = img.at(0, 0, 1) = img.at(0, 0, 2) = 0.0;
  dim.at(0, 0, 0) = dim.at(0, 0, 1) = dim.at(0, 0, 2) = 0.0;
  const ChannelStack a = nrng_channels(img);
  const ChannelStack b = nrng_channels(dim);
  EXPECT_DOUBLE_EQ(a.at(0, 0, 0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(a.at(0, 0, 1), 1.0 / 3.0);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x)
      for (int c = 0; c < 2; ++c) ASSERT_NEAR(a.at(x, y, c), b.at(x, y, c), 1e-14);
}

TEST(FeatureMap, LayoutPerSet) {
  std::mt19937_64 rng(13);
  const RgbImage img = random_image(rng);
  for (FeatureSet s : kAllFeatureSets) {
    const PixelFeatureMap m = build_feature_map(img, s);
    EXPECT_EQ(m.channels(), channel_count(s));
    EXPECT_EQ(m.values.rows(), 48 * 128);
  }
  const PixelFeatureMap ycm = build_feature_map(img, FeatureSet::kYcm);
  const ChannelStack moments = color_moments(img);
  EXPECT_DOUBLE_EQ(ycm.at(5, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(ycm.at(5, 127, 0), 1.0);
  EXPECT_DOUBLE_EQ(ycm.at(7, 33, 3), moments.at(7, 33, 2));

  const PixelFeatureMap hsv = build_feature_map(img, FeatureSet::kYgoHsv);
  const ChannelStack grad = gradient_orientation(img);
  const ChannelStack hsv_ref = hsv_channels(img);
  EXPECT_DOUBLE_EQ(hsv.at(9, 40, 2), grad.at(9, 40, 1));
  EXPECT_DOUBLE_EQ(hsv.at(9, 40, 7), hsv_ref.at(9, 40, 2));
}

TEST(FeatureMap, AbsoluteRowCoordinate) {
  std::mt19937_64 rng(17);
  PixelFeatureOptions opts;
  opts.row_coordinate = RowCoordinate::kAbsolute;
  const PixelFeatureMap m = build_feature_map(random_image(rng), FeatureSet::kYgoNrng, opts);
  EXPECT_DOUBLE_EQ(m.at(0, 77, 0), 77.0);
}

TEST(FeatureMap, PixelFusionSharesChannels) {
  std::mt19937_64 rng(19);
  const RgbImage img = random_image(rng);
  const std::vector<FeatureSet> all(std::begin(kAllFeatureSets), std::end(kAllFeatureSets));
  EXPECT_EQ(build_fused_feature_map(img, all).channels(), 1 + 6 + 13 + 4 + 3 + 2);
  EXPECT_EQ(build_fused_feature_map(img, {FeatureSet::kYgoHsv, FeatureSet::kYgoNrng}).channels(), 1 + 4 + 3 + 2);
  EXPECT_MLGD_ERROR(build_fused_feature_map(img, {}), ErrorKind::kConfiguration);
}

TEST(FeatureMap, ZeroAreaImageRejected) {
  EXPECT_MLGD_ERROR(build_feature_map(RgbImage{}, FeatureSet::kYcm), ErrorKind::kDegenerateInput);
}

}  // namespace
}  // namespace mlgd
