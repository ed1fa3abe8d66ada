#pragma once

// Two-level Gaussian encoding: patch Gaussians over pixel features are
// flattened to tangent vectors, region Gaussians over those vectors are
// flattened again, and the region vectors are concatenated.

#include "mlgd/image.hpp"
#include "mlgd/pixel_features.hpp"
#include "mlgd/spd_math.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mlgd {

/// How several feature sets are combined.
/// kDescriptor: one descriptor per set, concatenated (default).
/// kPixel: channels concatenated per pixel, one descriptor over the union.
enum class FusionMode { kDescriptor, kPixel };

struct DescriptorOptions {
  int patch_size = 5;
  int patch_stride = 2;
  int region_count = 7;
  int region_height = 32;
  int region_stride = 16;
  double patch_ridge = 1e-3;
  double region_ridge = 1e-3;
  double schmid_region_ridge = 1e-2;
  FusionMode fusion = FusionMode::kDescriptor;
  PixelFeatureOptions pixel;
};

struct PatchOrigin {
  int x = 0;
  int y = 0;
};

/// Regular grid of k x k patches, origins row-major, all inside the image.
struct PatchGrid {
  int patch_size = 5;
  int stride = 2;
  std::vector<PatchOrigin> origins;

  int center_row(const PatchOrigin& o) const { return o.y + patch_size / 2; }
};

PatchGrid make_patch_grid(int width, int height, int patch_size = 5, int stride = 2);

struct RegionStrip {
  int row_start = 0;
  int row_end = 0;  // exclusive
};

/// Overlapping horizontal strips of fixed height.
struct RegionLayout {
  std::vector<RegionStrip> strips;
};

RegionLayout make_region_layout(int image_height, int region_count = 7, int strip_height = 32, int stride = 16);

/// Flattened patch Gaussians, one row per patch in grid order.
struct PatchVectors {
  Matrix rows;
  std::vector<int> center_rows;
};

/// Sample mean and (N-1) covariance over the patch's pixel features, before
/// regularization.
GaussianModel patch_statistics(const PixelFeatureMap& fmap, const PatchOrigin& origin, int patch_size);

PatchVectors patch_gaussians(const PixelFeatureMap& fmap, const PatchGrid& grid, double ridge = kDefaultRidge);

/// Indices of patches whose center row lies in [row_start, row_end).
std::vector<Eigen::Index> region_members(const PatchVectors& patches, const RegionStrip& strip);

/// Second-level Gaussian over member patch vectors (rows), flattened.
Vector region_encode(const Matrix& member_vectors, double ridge = kDefaultRidge);

struct DescriptorBlock {
  FeatureSet set = FeatureSet::kYcm;  // first set of the union under pixel fusion
  int region = 0;
  Eigen::Index offset = 0;
  Eigen::Index length = 0;
};

struct Descriptor {
  Vector values;
  std::vector<DescriptorBlock> layout;
  std::string image_id;
};

/// Canonical ordering [YCM, SCHMID, YGOHSV, YGOnRnG] with duplicates removed.
std::vector<FeatureSet> canonical_sets(const std::vector<FeatureSet>& sets);

/// Closed-form descriptor length for the given sets and options.
Eigen::Index descriptor_length(const std::vector<FeatureSet>& sets, const DescriptorOptions& options = {});

/// Region vector length for a pixel feature of dimension n.
Eigen::Index region_vector_length(Eigen::Index n);

Descriptor extract_descriptor(const RgbImage& img, const std::vector<FeatureSet>& sets,
                              const DescriptorOptions& options = {});

struct NormalizedBatch {
  Matrix rows;  // one unit-norm descriptor per row
  Vector mean;  // the mean that was subtracted
};

/// (H - mean) / |H - mean|. Without a mean, the batch is a training batch and
/// its own mean is used and returned.
NormalizedBatch normalize_batch(const Matrix& rows, const std::optional<Vector>& training_mean = std::nullopt);
NormalizedBatch normalize_batch(const std::vector<Descriptor>& descriptors,
                                const std::optional<Vector>& training_mean = std::nullopt);

}  // namespace mlgd
