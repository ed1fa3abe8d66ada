#include "mlgd/metric_learning.hpp"

#include "mlgd/error.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace mlgd {

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::kEuclidean: return "euclidean";
    case MetricKind::kXqda: return "xqda";
    case MetricKind::kKissme: return "kissme";
    case MetricKind::kLfda: return "lfda";
  }
  throw Error(ErrorKind::kConfiguration, "unknown metric kind");
}

MetricKind parse_metric_kind(std::string_view name) {
  for (MetricKind k : {MetricKind::kEuclidean, MetricKind::kXqda, MetricKind::kKissme, MetricKind::kLfda}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::kConfiguration, "unknown metric '" + std::string(name) + "'");
}

namespace {

// Flip each column so its largest-magnitude entry is positive.
void canonical_signs(Matrix& columns) {
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    Eigen::Index arg = 0;
    columns.col(c).cwiseAbs().maxCoeff(&arg);
    if (columns(arg, c) < 0.0) columns.col(c) *= -1.0;
  }
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Matrix ridged(const Matrix& a, double ridge) {
  const double scale = std::max(a.trace() / static_cast<double>(a.rows()), 1e-8);
  Matrix out = a;
  out.diagonal().array() += ridge * scale;
  return out;
}

Matrix stack_views(const PairSet& pairs) {
  if (pairs.view_a.cols() != pairs.view_b.cols()) {
    throw Error(ErrorKind::kContract, "views have different descriptor lengths");
  }
  Matrix x(pairs.view_a.rows() + pairs.view_b.rows(), pairs.view_a.cols());
  x << pairs.view_a, pairs.view_b;
  return x;
}

void validate_pairs(const PairSet& pairs) {
  if (static_cast<std::size_t>(pairs.view_a.rows()) != pairs.labels_a.size() ||
      static_cast<std::size_t>(pairs.view_b.rows()) != pairs.labels_b.size()) {
    throw Error(ErrorKind::kContract, "label count does not match row count");
  }
  const std::set<int> in_b(pairs.labels_b.begin(), pairs.labels_b.end());
  std::set<int> identities;
  for (int label : pairs.labels_a) {
    if (!in_b.contains(label)) {
      throw Error(ErrorKind::kInsufficientData,
                  "identity " + std::to_string(label) + " has no image in the second view");
    }
    identities.insert(label);
  }
  if (identities.size() < 2) throw Error(ErrorKind::kInsufficientData, "training needs at least two identities");
}

struct PairDifferences {
  Matrix similar;
  Matrix dissimilar;
};

// All same-identity cross-view differences, plus negative_ratio times as many
// uniformly sampled different-identity differences (all of them when fewer exist).
PairDifferences pair_differences(const Matrix& a, const std::vector<int>& labels_a, const Matrix& b,
                                 const std::vector<int>& labels_b, int negative_ratio, std::uint64_t seed) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> positives;
  std::size_t negative_total = 0;
  for (std::size_t i = 0; i < labels_a.size(); ++i)
    for (std::size_t j = 0; j < labels_b.size(); ++j) {
      if (labels_a[i] == labels_b[j]) {
        positives.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      } else {
        ++negative_total;
      }
    }
  if (positives.empty() || negative_total == 0) {
    throw Error(ErrorKind::kInsufficientData, "need both similar and dissimilar pairs");
  }

  std::vector<std::pair<Eigen::Index, Eigen::Index>> negatives;
  const std::size_t wanted = positives.size() * static_cast<std::size_t>(std::max(1, negative_ratio));
  if (wanted >= negative_total) {
    for (std::size_t i = 0; i < labels_a.size(); ++i)
      for (std::size_t j = 0; j < labels_b.size(); ++j)
        if (labels_a[i] != labels_b[j]) negatives.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  } else {
    std::mt19937_64 rng(seed);
    std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
    while (negatives.size() < wanted) {
      const auto i = static_cast<Eigen::Index>(rng() % labels_a.size());
      const auto j = static_cast<Eigen::Index>(rng() % labels_b.size());
      if (labels_a[static_cast<std::size_t>(i)] == labels_b[static_cast<std::size_t>(j)]) continue;
      if (!seen.insert({i, j}).second) continue;
      negatives.emplace_back(i, j);
    }
  }

  PairDifferences out;
  out.similar.resize(static_cast<Eigen::Index>(positives.size()), a.cols());
  for (std::size_t k = 0; k < positives.size(); ++k)
    out.similar.row(static_cast<Eigen::Index>(k)) = a.row(positives[k].first) - b.row(positives[k].second);
  out.dissimilar.resize(static_cast<Eigen::Index>(negatives.size()), a.cols());
  for (std::size_t k = 0; k < negatives.size(); ++k)
    out.dissimilar.row(static_cast<Eigen::Index>(k)) = a.row(negatives[k].first) - b.row(negatives[k].second);
  return out;
}

Matrix second_moment(const Matrix& diffs) {
  return symmetrized(diffs.transpose() * diffs / static_cast<double>(diffs.rows()));
}

int resolve_pca_dim(const MetricOptions& options, Eigen::Index samples, Eigen::Index dim) {
  const auto limit = std::min<Eigen::Index>(samples - 1, dim);
  if (options.pca_dim > 0) return options.pca_dim;
  return static_cast<int>(std::min<Eigen::Index>(limit, options.pca_cap));
}

Matrix spectral_inverse(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  const Matrix& u = solver.eigenvectors();
  return symmetrized(u * solver.eigenvalues().cwiseInverse().asDiagonal() * u.transpose());
}

bool well_conditioned(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  const Vector& ev = solver.eigenvalues();
  return solver.info() == Eigen::Success && ev.maxCoeff() > 0.0 && ev.minCoeff() > 1e-10 * ev.maxCoeff();
}

// Ridge-and-retry inversion for covariance estimates.
Matrix robust_inverse(const Matrix& a, double ridge, std::string_view what) {
  if (well_conditioned(a)) return spectral_inverse(a);
  double r = ridge;
  for (int attempt = 0; attempt < 4; ++attempt, r *= 10.0) {
    const Matrix reg = ridged(a, r);
    if (well_conditioned(reg)) return spectral_inverse(reg);
  }
  throw Error(ErrorKind::kNumerical, std::string(what) + " covariance stays singular after regularization");
}

}  // namespace

Matrix PcaTransform::project(const Matrix& rows) const {
  if (rows.cols() != mean.size()) throw Error(ErrorKind::kContract, "PCA input dimension mismatch");
  return (rows.rowwise() - mean.transpose()) * basis;
}

PcaTransform fit_pca(const Matrix& x, int target_dim) {
  const auto n = x.rows();
  const auto d = x.cols();
  if (target_dim < 1 || target_dim > std::min<Eigen::Index>(n - 1, d)) {
    throw Error(ErrorKind::kConfiguration, "PCA dimension " + std::to_string(target_dim) + " outside [1, min(N-1, d)]");
  }
  PcaTransform pca;
  pca.mean = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - pca.mean.transpose();
  const Matrix gram = symmetrized(centered * centered.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::kNumerical, "Gram eigendecomposition failed");

  pca.basis.resize(d, target_dim);
  pca.eigenvalues.resize(target_dim);
  const double top = std::max(solver.eigenvalues()(n - 1), 0.0);
  for (int k = 0; k < target_dim; ++k) {
    const double lambda = solver.eigenvalues()(n - 1 - k);
    if (!(lambda > 1e-12 * top) || !(lambda > 0.0)) {
      throw Error(ErrorKind::kNumerical, "data rank is below the requested PCA dimension");
    }
    pca.basis.col(k) = centered.transpose() * solver.eigenvectors().col(n - 1 - k) / std::sqrt(lambda);
    pca.eigenvalues(k) = lambda / static_cast<double>(n - 1);
  }
  canonical_signs(pca.basis);
  return pca;
}

Matrix MetricModel::embed(const Matrix& rows) const {
  if (rows.cols() != input_dim) {
    throw Error(ErrorKind::kContract, "descriptor length " + std::to_string(rows.cols()) +
                                          " does not match model input " + std::to_string(input_dim));
  }
  Matrix z = pca ? pca->project(rows) : rows;
  if (projection.size() > 0) z = z * projection;
  return z;
}

MetricModel make_euclidean(Eigen::Index dim) {
  MetricModel model;
  model.kind = MetricKind::kEuclidean;
  model.input_dim = dim;
  return model;
}

XqdaSubspace xqda_subspace(const Matrix& sigma_intra, const Matrix& sigma_extra, double ridge, int max_dim) {
  const Matrix intra = ridged(symmetrized(sigma_intra), ridge);
  const Matrix extra = symmetrized(sigma_extra);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(extra, intra);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::kNumerical, "XQDA generalized eigenproblem failed");

  const auto p = intra.rows();
  const Vector& ev = solver.eigenvalues();  // ascending
  Eigen::Index keep = 0;
  for (Eigen::Index k = p - 1; k >= 0 && ev(k) > 1.0; --k) ++keep;
  keep = std::clamp<Eigen::Index>(keep, 1, std::min<Eigen::Index>(max_dim, p));

  XqdaSubspace out;
  out.projection.resize(p, keep);
  out.eigenvalues.resize(keep);
  for (Eigen::Index k = 0; k < keep; ++k) {
    out.projection.col(k) = solver.eigenvectors().col(p - 1 - k);
    out.eigenvalues(k) = ev(p - 1 - k);
  }
  canonical_signs(out.projection);
  const Matrix& w = out.projection;
  out.kernel = symmetrized(spectral_inverse(symmetrized(w.transpose() * intra * w)) -
                           spectral_inverse(symmetrized(w.transpose() * extra * w)));
  return out;
}

Matrix kissme_kernel(const Matrix& similar_diffs, const Matrix& dissimilar_diffs, double ridge, bool psd_clip) {
  if (similar_diffs.rows() == 0 || dissimilar_diffs.rows() == 0) {
    throw Error(ErrorKind::kInsufficientData, "KISSME needs similar and dissimilar pairs");
  }
  const Matrix m = symmetrized(robust_inverse(second_moment(similar_diffs), ridge, "similar-pair") -
                               robust_inverse(second_moment(dissimilar_diffs), ridge, "dissimilar-pair"));
  if (!psd_clip) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  const Matrix& u = solver.eigenvectors();
  return symmetrized(u * solver.eigenvalues().cwiseMax(0.0).asDiagonal() * u.transpose());
}

MetricModel fit_xqda(const PairSet& pairs, const MetricOptions& options) {
  validate_pairs(pairs);
  MetricModel model;
  model.kind = MetricKind::kXqda;
  model.input_dim = pairs.view_a.cols();
  Matrix a = pairs.view_a;
  Matrix b = pairs.view_b;
  if (options.xqda_use_pca) {
    const Matrix all = stack_views(pairs);
    model.pca = fit_pca(all, resolve_pca_dim(options, all.rows(), all.cols()));
    a = model.pca->project(a);
    b = model.pca->project(b);
  }
  const auto diffs = pair_differences(a, pairs.labels_a, b, pairs.labels_b, options.negative_ratio, options.seed);
  auto sub = xqda_subspace(second_moment(diffs.similar), second_moment(diffs.dissimilar), options.xqda_ridge,
                           options.xqda_max_dim);
  model.projection = std::move(sub.projection);
  model.kernel = std::move(sub.kernel);
  return model;
}

MetricModel fit_kissme(const PairSet& pairs, const MetricOptions& options) {
  validate_pairs(pairs);
  MetricModel model;
  model.kind = MetricKind::kKissme;
  model.input_dim = pairs.view_a.cols();
  const Matrix all = stack_views(pairs);
  model.pca = fit_pca(all, resolve_pca_dim(options, all.rows(), all.cols()));
  const Matrix a = model.pca->project(pairs.view_a);
  const Matrix b = model.pca->project(pairs.view_b);
  const auto diffs = pair_differences(a, pairs.labels_a, b, pairs.labels_b, options.negative_ratio, options.seed);
  model.kernel = kissme_kernel(diffs.similar, diffs.dissimilar, options.kissme_ridge, options.psd_clip);
  return model;
}

MetricModel fit_lfda(const Matrix& x, const std::vector<int>& labels, const MetricOptions& options) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw Error(ErrorKind::kContract, "label count does not match row count");
  }
  std::map<int, std::vector<Eigen::Index>> classes;
  for (std::size_t i = 0; i < labels.size(); ++i) classes[labels[i]].push_back(static_cast<Eigen::Index>(i));
  if (classes.size() < 2) throw Error(ErrorKind::kInsufficientData, "LFDA needs at least two classes");

  MetricModel model;
  model.kind = MetricKind::kLfda;
  model.input_dim = x.cols();
  model.pca = fit_pca(x, resolve_pca_dim(options, x.rows(), x.cols()));
  const Matrix z = model.pca->project(x);
  const auto n = z.rows();
  const auto p = z.cols();

  // Locality-weighted within/between affinities with local scaling.
  Matrix w_within = Matrix::Zero(n, n);
  Matrix w_between = Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  int singletons = 0;
  for (const auto& [label, members] : classes) {
    const auto nc = static_cast<Eigen::Index>(members.size());
    if (nc == 1) {
      ++singletons;
      continue;
    }
    Matrix dist2(nc, nc);
    for (Eigen::Index i = 0; i < nc; ++i)
      for (Eigen::Index j = 0; j < nc; ++j) dist2(i, j) = (z.row(members[i]) - z.row(members[j])).squaredNorm();
    const auto k = std::min<Eigen::Index>(options.lfda_neighbors, nc - 1);
    Vector scale(nc);
    for (Eigen::Index i = 0; i < nc; ++i) {
      std::vector<double> row;
      for (Eigen::Index j = 0; j < nc; ++j)
        if (j != i) row.push_back(dist2(i, j));
      std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
      scale(i) = std::max(std::sqrt(row[static_cast<std::size_t>(k - 1)]), 1e-12);
    }
    for (Eigen::Index i = 0; i < nc; ++i)
      for (Eigen::Index j = 0; j < nc; ++j) {
        const double affinity = std::exp(-dist2(i, j) / (scale(i) * scale(j)));
        w_within(members[i], members[j]) = affinity / static_cast<double>(nc);
        w_between(members[i], members[j]) =
            affinity * (1.0 / static_cast<double>(n) - 1.0 / static_cast<double>(nc));
      }
  }
  if (singletons > 0) {
    std::clog << "warning: LFDA: " << singletons
              << " single-sample classes contribute only to the between-class scatter\n";
  }

  // 1/2 sum_ij w_ij (z_i - z_j)(z_i - z_j)^T = Z^T (D - W) Z.
  const auto scatter = [&](const Matrix& w) {
    Matrix lap = -w;
    lap.diagonal() += w.rowwise().sum();
    return symmetrized(z.transpose() * lap * z);
  };
  const Matrix s_within = ridged(scatter(w_within), options.lfda_ridge);
  const Matrix s_between = scatter(w_between);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(s_between, s_within);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::kNumerical, "LFDA generalized eigenproblem failed");

  const auto r = std::clamp<Eigen::Index>(options.lfda_dim, 1, p);
  Matrix w(p, r);
  for (Eigen::Index k = 0; k < r; ++k) w.col(k) = solver.eigenvectors().col(p - 1 - k);
  Eigen::HouseholderQR<Matrix> qr(w);
  model.projection = qr.householderQ() * Matrix::Identity(p, r);
  canonical_signs(model.projection);
  model.kernel = Matrix::Identity(r, r);
  return model;
}

MetricModel fit_lfda(const PairSet& pairs, const MetricOptions& options) {
  validate_pairs(pairs);
  std::vector<int> labels = pairs.labels_a;
  labels.insert(labels.end(), pairs.labels_b.begin(), pairs.labels_b.end());
  return fit_lfda(stack_views(pairs), labels, options);
}

MetricModel fit_metric(MetricKind kind, const PairSet& pairs, const MetricOptions& options) {
  switch (kind) {
    case MetricKind::kEuclidean: validate_pairs(pairs); return make_euclidean(pairs.view_a.cols());
    case MetricKind::kXqda: return fit_xqda(pairs, options);
    case MetricKind::kKissme: return fit_kissme(pairs, options);
    case MetricKind::kLfda: return fit_lfda(pairs, options);
  }
  throw Error(ErrorKind::kConfiguration, "unknown metric kind");
}

namespace {

double quadratic(const Matrix& kernel, const Eigen::Ref<const Eigen::RowVectorXd>& d) {
  if (kernel.size() == 0) return d.squaredNorm();
  return (d * kernel).dot(d);
}

}  // namespace

double score(const MetricModel& model, const Vector& probe, const Vector& gallery_item) {
  if (probe.size() != model.input_dim || gallery_item.size() != model.input_dim) {
    throw Error(ErrorKind::kContract, "descriptor length does not match the model");
  }
  Matrix both(2, probe.size());
  both.row(0) = probe.transpose();
  both.row(1) = gallery_item.transpose();
  const Matrix e = model.embed(both);
  const Eigen::RowVectorXd d = e.row(0) - e.row(1);
  return quadratic(model.kernel, d);
}

Matrix score_matrix(const MetricModel& model, const Matrix& probes, const Matrix& gallery) {
  const Matrix ep = model.embed(probes);
  const Matrix eg = model.embed(gallery);
  Matrix out(ep.rows(), eg.rows());
  for (Eigen::Index i = 0; i < ep.rows(); ++i) {
    const Matrix diffs = eg.rowwise() - ep.row(i);
    if (model.kernel.size() == 0) {
      out.row(i) = diffs.rowwise().squaredNorm().transpose();
    } else {
      out.row(i) = (diffs * model.kernel).cwiseProduct(diffs).rowwise().sum().transpose();
    }
  }
  return out;
}

}  // namespace mlgd
