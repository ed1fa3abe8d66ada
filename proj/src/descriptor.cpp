#include "mlgd/descriptor.hpp"

#include "mlgd/error.hpp"

#include <algorithm>
#include <sstream>

namespace mlgd {

PatchGrid make_patch_grid(int width, int height, int patch_size, int stride) {
  if (patch_size < 1 || stride < 1) throw Error(ErrorKind::kConfiguration, "patch size and stride must be positive");
  if (patch_size * patch_size < 2) throw Error(ErrorKind::kDegeneratePatch, "patch holds fewer than two pixels");
  if (patch_size > width || patch_size > height) {
    throw Error(ErrorKind::kConfiguration, "patch larger than the image");
  }
  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.stride = stride;
  for (int y = 0; y + patch_size <= height; y += stride)
    for (int x = 0; x + patch_size <= width; x += stride) grid.origins.push_back({x, y});
  return grid;
}

RegionLayout make_region_layout(int image_height, int region_count, int strip_height, int stride) {
  if (region_count < 1 || strip_height < 1 || stride < 1) {
    throw Error(ErrorKind::kConfiguration, "region parameters must be positive");
  }
  if ((region_count - 1) * stride + strip_height > image_height) {
    std::ostringstream msg;
    msg << region_count << " strips of height " << strip_height << " with stride " << stride
        << " do not fit in " << image_height << " rows";
    throw Error(ErrorKind::kConfiguration, msg.str());
  }
  RegionLayout layout;
  for (int r = 0; r < region_count; ++r) layout.strips.push_back({r * stride, r * stride + strip_height});
  return layout;
}

GaussianModel patch_statistics(const PixelFeatureMap& fmap, const PatchOrigin& origin, int patch_size) {
  if (origin.x < 0 || origin.y < 0 || origin.x + patch_size > fmap.width || origin.y + patch_size > fmap.height) {
    throw Error(ErrorKind::kContract, "patch outside the feature map");
  }
  if (patch_size * patch_size < 2) throw Error(ErrorKind::kDegeneratePatch, "patch holds fewer than two pixels");
  Matrix samples(patch_size * patch_size, fmap.channels());
  Eigen::Index i = 0;
  for (int y = origin.y; y < origin.y + patch_size; ++y)
    for (int x = origin.x; x < origin.x + patch_size; ++x)
      samples.row(i++) = fmap.values.row(static_cast<Eigen::Index>(y) * fmap.width + x);
  return sample_gaussian(samples);
}

PatchVectors patch_gaussians(const PixelFeatureMap& fmap, const PatchGrid& grid, double ridge) {
  const auto m = gaussian_vector_length(fmap.channels());
  PatchVectors out;
  out.rows.resize(static_cast<Eigen::Index>(grid.origins.size()), m);
  out.center_rows.reserve(grid.origins.size());
  for (std::size_t p = 0; p < grid.origins.size(); ++p) {
    GaussianModel g = patch_statistics(fmap, grid.origins[p], grid.patch_size);
    g.sigma = regularize_covariance(g.sigma, ridge);
    out.rows.row(static_cast<Eigen::Index>(p)) = gaussian_to_vector(g).values.transpose();
    out.center_rows.push_back(grid.center_row(grid.origins[p]));
  }
  return out;
}

std::vector<Eigen::Index> region_members(const PatchVectors& patches, const RegionStrip& strip) {
  std::vector<Eigen::Index> members;
  for (std::size_t i = 0; i < patches.center_rows.size(); ++i) {
    const int c = patches.center_rows[i];
    if (c >= strip.row_start && c < strip.row_end) members.push_back(static_cast<Eigen::Index>(i));
  }
  return members;
}

Vector region_encode(const Matrix& member_vectors, double ridge) {
  if (member_vectors.rows() < 2) {
    throw Error(ErrorKind::kDegenerateRegion, "region contains fewer than two patches");
  }
  GaussianModel g = sample_gaussian(member_vectors);
  g.sigma = regularize_covariance(g.sigma, ridge);
  return gaussian_to_vector(g).values;
}

std::vector<FeatureSet> canonical_sets(const std::vector<FeatureSet>& sets) {
  std::vector<FeatureSet> out;
  for (FeatureSet s : kAllFeatureSets) {
    if (std::find(sets.begin(), sets.end(), s) != sets.end()) out.push_back(s);
  }
  if (out.empty()) throw Error(ErrorKind::kConfiguration, "no feature sets selected");
  return out;
}

Eigen::Index region_vector_length(Eigen::Index n) { return gaussian_vector_length(gaussian_vector_length(n)); }

namespace {

int fused_channel_count(const std::vector<FeatureSet>& sets) {
  bool y = false, moments = false, schmid = false, gradient = false, hsv = false, nrng = false;
  for (FeatureSet s : sets) {
    switch (s) {
      case FeatureSet::kYcm: y = moments = true; break;
      case FeatureSet::kSchmid: schmid = true; break;
      case FeatureSet::kYgoHsv: y = gradient = hsv = true; break;
      case FeatureSet::kYgoNrng: y = gradient = nrng = true; break;
    }
  }
  return (y ? 1 : 0) + (moments ? 6 : 0) + (schmid ? 13 : 0) + (gradient ? 4 : 0) + (hsv ? 3 : 0) + (nrng ? 2 : 0);
}

void encode_map(const PixelFeatureMap& fmap, FeatureSet label, double region_ridge, const DescriptorOptions& options,
                Descriptor& out, Eigen::Index& offset) {
  const PatchGrid grid = make_patch_grid(fmap.width, fmap.height, options.patch_size, options.patch_stride);
  const RegionLayout layout =
      make_region_layout(fmap.height, options.region_count, options.region_height, options.region_stride);
  const PatchVectors patches = patch_gaussians(fmap, grid, options.patch_ridge);
  for (std::size_t r = 0; r < layout.strips.size(); ++r) {
    const auto members = region_members(patches, layout.strips[r]);
    if (members.size() < 2) {
      throw Error(ErrorKind::kDegenerateRegion, "region " + std::to_string(r) + " contains fewer than two patches");
    }
    const Matrix member_rows = patches.rows(members, Eigen::all);
    const Vector v = region_encode(member_rows, region_ridge);
    out.values.segment(offset, v.size()) = v;
    out.layout.push_back({label, static_cast<int>(r), offset, v.size()});
    offset += v.size();
  }
}

}  // namespace

Eigen::Index descriptor_length(const std::vector<FeatureSet>& sets, const DescriptorOptions& options) {
  const auto ordered = canonical_sets(sets);
  if (options.fusion == FusionMode::kPixel) {
    return options.region_count * region_vector_length(fused_channel_count(ordered));
  }
  Eigen::Index total = 0;
  for (FeatureSet s : ordered) total += options.region_count * region_vector_length(channel_count(s));
  return total;
}

Descriptor extract_descriptor(const RgbImage& img, const std::vector<FeatureSet>& sets,
                              const DescriptorOptions& options) {
  const auto ordered = canonical_sets(sets);
  Descriptor out;
  out.values.resize(descriptor_length(ordered, options));
  Eigen::Index offset = 0;
  if (options.fusion == FusionMode::kPixel) {
    const PixelFeatureMap fmap = build_fused_feature_map(img, ordered, options.pixel);
    const bool has_schmid = std::find(ordered.begin(), ordered.end(), FeatureSet::kSchmid) != ordered.end();
    encode_map(fmap, ordered.front(), has_schmid ? options.schmid_region_ridge : options.region_ridge, options, out,
               offset);
  } else {
    for (FeatureSet s : ordered) {
      const PixelFeatureMap fmap = build_feature_map(img, s, options.pixel);
      const double ridge = s == FeatureSet::kSchmid ? options.schmid_region_ridge : options.region_ridge;
      encode_map(fmap, s, ridge, options, out, offset);
    }
  }
  if (offset != out.values.size()) throw Error(ErrorKind::kContract, "descriptor layout does not fill its length");
  return out;
}

NormalizedBatch normalize_batch(const Matrix& rows, const std::optional<Vector>& training_mean) {
  NormalizedBatch out;
  if (training_mean) {
    if (training_mean->size() != rows.cols()) {
      throw Error(ErrorKind::kContract, "training mean length does not match descriptor length");
    }
    out.mean = *training_mean;
  } else {
    if (rows.rows() == 0) throw Error(ErrorKind::kInsufficientData, "empty training batch");
    out.mean = rows.colwise().mean().transpose();
  }
  out.rows = rows.rowwise() - out.mean.transpose();
  for (Eigen::Index i = 0; i < out.rows.rows(); ++i) {
    const double norm = out.rows.row(i).norm();
    if (!(norm > 0.0)) {
      throw Error(ErrorKind::kDegenerateDescriptor,
                  "descriptor " + std::to_string(i) + " equals the mean; cannot normalize");
    }
    out.rows.row(i) /= norm;
  }
  return out;
}

NormalizedBatch normalize_batch(const std::vector<Descriptor>& descriptors, const std::optional<Vector>& training_mean) {
  if (descriptors.empty()) {
    if (!training_mean) throw Error(ErrorKind::kInsufficientData, "empty training batch");
    return {Matrix(0, training_mean->size()), *training_mean};
  }
  Matrix rows(static_cast<Eigen::Index>(descriptors.size()), descriptors.front().values.size());
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    if (descriptors[i].values.size() != rows.cols()) {
      throw Error(ErrorKind::kContract, "descriptors in a batch must share one length");
    }
    rows.row(static_cast<Eigen::Index>(i)) = descriptors[i].values.transpose();
  }
  return normalize_batch(rows, training_mean);
}

}  // namespace mlgd
