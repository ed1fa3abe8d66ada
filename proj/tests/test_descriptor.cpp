#include "mlgd/descriptor.hpp"

#include "test_support.hpp"

namespace mlgd {
namespace {

using testing::random_image;

// Two-pass mean and (N-1) covariance over the k x k patch at (x0, y0).
GaussianModel brute_patch(const PixelFeatureMap& m, int x0, int y0, int k) {
  const int n = m.channels();
  GaussianModel g{Vector::Zero(n), Matrix::Zero(n, n)};
  for (int y = y0; y < y0 + k; ++y)
    for (int x = x0; x < x0 + k; ++x)
      for (int c = 0; c < n; ++c) g.mu(c) += m.at(x, y, c);
  g.mu /= k * k;
  for (int y = y0; y < y0 + k; ++y)
    for (int x = x0; x < x0 + k; ++x)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g.sigma(i, j) += (m.at(x, y, i) - g.mu(i)) * (m.at(x, y, j) - g.mu(j));
  g.sigma /= k * k - 1;
  return g;
}

TEST(PatchGrid, StandardFrameHas1364Patches) {
  const PatchGrid grid = make_patch_grid(48, 128);
  EXPECT_EQ(grid.origins.size(), 22u * 62u);
  EXPECT_EQ(grid.origins.front().x, 0);
  EXPECT_EQ(grid.origins[1].x, 2);
  EXPECT_EQ(grid.origins.back().x, 42);
  EXPECT_EQ(grid.origins.back().y, 122);
  EXPECT_EQ(grid.center_row(grid.origins.back()), 124);
}

TEST(PatchGrid, RejectsBadGeometry) {
  EXPECT_MLGD_ERROR(make_patch_grid(4, 4, 5, 2), ErrorKind::kConfiguration);
  EXPECT_MLGD_ERROR(make_patch_grid(48, 128, 0, 2), ErrorKind::kConfiguration);
  EXPECT_MLGD_ERROR(make_patch_grid(48, 128, 1, 1), ErrorKind::kDegeneratePatch);
}

TEST(RegionLayout, SevenOverlappingStrips) {
  const RegionLayout layout = make_region_layout(128);
  ASSERT_EQ(layout.strips.size(), 7u);
  for (int r = 0; r < 7; ++r) {
    EXPECT_EQ(layout.strips[r].row_start, 16 * r);
    EXPECT_EQ(layout.strips[r].row_end, 16 * r + 32);
  }
  EXPECT_MLGD_ERROR(make_region_layout(100), ErrorKind::kConfiguration);
}

TEST(PatchStatistics, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  const RgbImage img = random_image(rng);
  const PixelFeatureMap m = build_feature_map(img, FeatureSet::kYgoHsv);
  std::uniform_int_distribution<int> ux(0, 43), uy(0, 123);
  for (int t = 0; t < 20; ++t) {
    const int x = ux(rng), y = uy(rng);
    const GaussianModel g = patch_statistics(m, {x, y}, 5);
    const GaussianModel oracle = brute_patch(m, x, y, 5);
    EXPECT_LE((g.mu - oracle.mu).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((g.sigma - oracle.sigma).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_MLGD_ERROR(patch_statistics(m, {45, 0}, 5), ErrorKind::kContract);
}

TEST(RegionMembers, SelectedByCenterRow) {
  std::mt19937_64 rng(3);
  const PixelFeatureMap m = build_feature_map(random_image(rng), FeatureSet::kYgoNrng);
  const PatchGrid grid = make_patch_grid(48, 128);
  const PatchVectors patches = patch_gaussians(m, grid);
  const RegionLayout layout = make_region_layout(128);
  for (const auto& strip : layout.strips) {
    const auto members = region_members(patches, strip);
    std::vector<Eigen::Index> expected;
    for (std::size_t i = 0; i < grid.origins.size(); ++i) {
      const int c = grid.origins[i].y + 2;
      if (c >= strip.row_start && c < strip.row_end) expected.push_back(static_cast<Eigen::Index>(i));
    }
    EXPECT_EQ(members, expected);
    // Centers run 2, 4, ..., 124, so the top and bottom strips hold one patch row fewer.
    const bool edge = strip.row_start == 0 || strip.row_end == 128;
    EXPECT_EQ(members.size(), (edge ? 15u : 16u) * 22u);
  }
}

TEST(RegionEncode, NeedsTwoMembers) {
  EXPECT_MLGD_ERROR(region_encode(Matrix::Ones(1, 36)), ErrorKind::kDegenerateRegion);
}

TEST(DescriptorLength, ClosedForm) {
  EXPECT_EQ(region_vector_length(7), 703);
  EXPECT_EQ(region_vector_length(8), 1081);
  EXPECT_EQ(region_vector_length(13), 5671);
  EXPECT_EQ(descriptor_length({FeatureSet::kYcm}), 4921);
  const std::vector<FeatureSet> all(std::begin(kAllFeatureSets), std::end(kAllFeatureSets));
  EXPECT_EQ(descriptor_length(all), 57106);
  DescriptorOptions pixel;
  pixel.fusion = FusionMode::kPixel;
  EXPECT_EQ(descriptor_length(all, pixel), 7 * region_vector_length(29));
}

TEST(CanonicalSets, OrdersAndDeduplicates) {
  const auto s = canonical_sets({FeatureSet::kYgoNrng, FeatureSet::kYcm, FeatureSet::kYgoNrng});
  EXPECT_EQ(s, (std::vector<FeatureSet>{FeatureSet::kYcm, FeatureSet::kYgoNrng}));
  EXPECT_MLGD_ERROR(canonical_sets({}), ErrorKind::kConfiguration);
}

// Rebuild one region block from brute-force patch statistics and the SPD
// primitives, then compare with the extractor.
TEST(ExtractDescriptor, RegionBlockMatchesHandAssembly) {
  std::mt19937_64 rng(5);
  const RgbImage img = random_image(rng);
  const Descriptor d = extract_descriptor(img, {FeatureSet::kYcm});
  ASSERT_EQ(d.values.size(), 4921);
  ASSERT_EQ(d.layout.size(), 7u);

  const PixelFeatureMap m = build_feature_map(img, FeatureSet::kYcm);
  const int region = 3;
  std::vector<Vector> members;
  for (int y = 0; y + 5 <= 128; y += 2) {
    if (y + 2 < 16 * region || y + 2 >= 16 * region + 32) continue;
    for (int x = 0; x + 5 <= 48; x += 2) {
      GaussianModel g = brute_patch(m, x, y, 5);
      g.sigma = regularize_covariance(g.sigma, 1e-3);
      members.push_back(gaussian_to_vector(g).values);
    }
  }
  Matrix rows(static_cast<Eigen::Index>(members.size()), 36);
  for (std::size_t i = 0; i < members.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = members[i].transpose();
  GaussianModel region_g = sample_gaussian(rows);
  region_g.sigma = regularize_covariance(region_g.sigma, 1e-3);
  const Vector expected = gaussian_to_vector(region_g).values;

  const DescriptorBlock& block = d.layout[region];
  EXPECT_EQ(block.region, region);
  EXPECT_EQ(block.length, 703);
  EXPECT_EQ(block.offset, 3 * 703);
  EXPECT_LE((d.values.segment(block.offset, block.length) - expected).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ExtractDescriptor, LayoutIsContiguousInCanonicalOrder) {
  std::mt19937_64 rng(7);
  const Descriptor d = extract_descriptor(random_image(rng), {FeatureSet::kYgoNrng, FeatureSet::kSchmid});
  ASSERT_EQ(d.layout.size(), 14u);
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < d.layout.size(); ++i) {
    EXPECT_EQ(d.layout[i].set, i < 7 ? FeatureSet::kSchmid : FeatureSet::kYgoNrng);
    EXPECT_EQ(d.layout[i].offset, offset);
    offset += d.layout[i].length;
  }
  EXPECT_EQ(offset, d.values.size());
  EXPECT_TRUE(d.values.allFinite());
}

TEST(ExtractDescriptor, FlatImageStaysFinite) {
  const Descriptor d = extract_descriptor(RgbImage(48, 128, 0.5), {FeatureSet::kYcm, FeatureSet::kSchmid});
  EXPECT_TRUE(d.values.allFinite());
}

TEST(ExtractDescriptor, PixelFusionProducesOneBlockPerRegion) {
  std::mt19937_64 rng(9);
  DescriptorOptions opts;
  opts.fusion = FusionMode::kPixel;
  const Descriptor d = extract_descriptor(random_image(rng), {FeatureSet::kYgoHsv, FeatureSet::kYgoNrng}, opts);
  EXPECT_EQ(d.layout.size(), 7u);
  EXPECT_EQ(d.values.size(), 7 * region_vector_length(10));
}

TEST(Normalize, UnitRowsAroundTrainingMean) {
  std::mt19937_64 rng(11);
  const Matrix x = testing::random_matrix(rng, 6, 20);
  const NormalizedBatch train = normalize_batch(x);
  EXPECT_LE((train.mean - x.colwise().mean().transpose()).norm(), 1e-14);
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(train.rows.row(i).norm(), 1.0, 1e-14);

  const Matrix y = testing::random_matrix(rng, 3, 20);
  const NormalizedBatch test = normalize_batch(y, train.mean);
  EXPECT_EQ(test.mean, train.mean);
  const Vector d = y.row(1).transpose() - train.mean;
  EXPECT_LE((test.rows.row(1).transpose() - d / d.norm()).norm(), 1e-14);
}

TEST(Normalize, DescriptorEqualToMeanIsDegenerate) {
  Matrix x(2, 3);
  x << 1, 2, 3, 1, 2, 3;
  EXPECT_MLGD_ERROR(normalize_batch(x), ErrorKind::kDegenerateDescriptor);
  EXPECT_MLGD_ERROR(normalize_batch(Matrix::Ones(1, 4), Vector::Ones(3)), ErrorKind::kContract);
}

}  // namespace
}  // namespace mlgd
