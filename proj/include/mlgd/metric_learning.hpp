#pragma once

// Cross-view distance learning on normalized descriptors. A fitted model maps
// a descriptor x to W^T P^T (x - pca_mean) and scores a pair by the quadratic
// form (a - b)^T M (a - b) in that subspace.

#include "mlgd/spd_math.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mlgd {

enum class MetricKind : std::uint32_t { kEuclidean = 0, kXqda = 1, kKissme = 2, kLfda = 3 };

std::string_view to_string(MetricKind kind);
MetricKind parse_metric_kind(std::string_view name);

struct MetricOptions {
  /// 0 selects min(N - 1, pca_cap).
  int pca_dim = 0;
  int pca_cap = 631;
  /// XQDA uses PCA unless disabled; KISSME and LFDA always do.
  bool xqda_use_pca = true;
  double xqda_ridge = 1e-3;
  int xqda_max_dim = 64;
  double kissme_ridge = 1e-3;
  bool psd_clip = true;
  int lfda_neighbors = 7;
  int lfda_dim = 64;
  double lfda_ridge = 1e-3;
  /// Dissimilar pairs sampled per similar pair.
  int negative_ratio = 10;
  std::uint64_t seed = 0;
};

struct PcaTransform {
  Vector mean;
  Matrix basis;  // d x p, orthonormal columns
  Vector eigenvalues;

  Matrix project(const Matrix& rows) const;  // rows are samples
};

/// Principal axes of the rows of `x` via the N x N Gram matrix.
/// Requires 1 <= target_dim <= min(N - 1, d).
PcaTransform fit_pca(const Matrix& x, int target_dim);

struct MetricModel {
  MetricKind kind = MetricKind::kEuclidean;
  std::optional<PcaTransform> pca;
  Matrix projection;  // W, p x r
  Matrix kernel;      // M, r x r symmetric
  Vector train_mean;  // descriptor mean subtracted before normalization
  Eigen::Index input_dim = 0;

  /// Rows of `rows` mapped into the learned subspace.
  Matrix embed(const Matrix& rows) const;
};

/// Two-view training set. Row i of view_a carries label labels_a[i].
struct PairSet {
  Matrix view_a;
  Matrix view_b;
  std::vector<int> labels_a;
  std::vector<int> labels_b;
};

/// Euclidean baseline over the raw dimension d.
MetricModel make_euclidean(Eigen::Index dim);

/// Generalized eigenproblem Sigma_E w = lambda Sigma_I w with Sigma_I ridged by
/// ridge * trace/dim. Keeps eigenvectors with lambda > 1 (at least one, at
/// most max_dim). Returns W (columns Sigma_I-orthonormal) and the eigenvalues.
struct XqdaSubspace {
  Matrix projection;
  Vector eigenvalues;
  Matrix kernel;
};
XqdaSubspace xqda_subspace(const Matrix& sigma_intra, const Matrix& sigma_extra, double ridge, int max_dim);

/// M = Sigma_S^-1 - Sigma_D^-1 from difference-vector second moments, with
/// ridge retry on singular input and optional PSD clipping.
Matrix kissme_kernel(const Matrix& similar_diffs, const Matrix& dissimilar_diffs, double ridge, bool psd_clip);

MetricModel fit_xqda(const PairSet& pairs, const MetricOptions& options = {});
MetricModel fit_kissme(const PairSet& pairs, const MetricOptions& options = {});
MetricModel fit_lfda(const Matrix& x, const std::vector<int>& labels, const MetricOptions& options = {});
MetricModel fit_lfda(const PairSet& pairs, const MetricOptions& options = {});

MetricModel fit_metric(MetricKind kind, const PairSet& pairs, const MetricOptions& options = {});

/// Dissimilarity (x - z)^T W M W^T (x - z) after the model's PCA.
double score(const MetricModel& model, const Vector& probe, const Vector& gallery_item);

/// P x G score matrix between normalized probe and gallery rows.
Matrix score_matrix(const MetricModel& model, const Matrix& probes, const Matrix& gallery);

}  // namespace mlgd
