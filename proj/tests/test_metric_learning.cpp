#include "mlgd/metric_learning.hpp"

#include "test_support.hpp"

#include <algorithm>
#include <sstream>

namespace mlgd {
namespace {

using testing::random_matrix;

// Identity i has center c_i; each view adds its own noise.
PairSet clustered_pairs(std::mt19937_64& rng, int identities, int dim, double spread, double noise) {
  const Matrix centers = random_matrix(rng, identities, dim, spread);
  PairSet p;
  p.view_a = centers + random_matrix(rng, identities, dim, noise);
  p.view_b = centers + random_matrix(rng, identities, dim, noise);
  for (int i = 0; i < identities; ++i) {
    p.labels_a.push_back(i);
    p.labels_b.push_back(i);
  }
  return p;
}

int rank1_hits(const Matrix& scores) {
  int hits = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).minCoeff(&best);
    hits += best == i;
  }
  return hits;
}

TEST(Pca, GramTrickMatchesDirectCovariance) {
  std::mt19937_64 rng(1);
  Matrix x = random_matrix(rng, 40, 12);
  x.col(3) *= 5.0;
  x.col(7) *= 3.0;
  const PcaTransform pca = fit_pca(x, 6);

  const Matrix centered = x.rowwise() - x.colwise().mean();
  const Matrix cov = centered.transpose() * centered / 39.0;
  Eigen::SelfAdjointEigenSolver<Matrix> direct(cov);
  for (int k = 0; k < 6; ++k) {
    const Vector oracle = direct.eigenvectors().col(11 - k);
    EXPECT_NEAR(std::abs(pca.basis.col(k).dot(oracle)), 1.0, 1e-9) << "component " << k;
    EXPECT_NEAR(pca.eigenvalues(k), direct.eigenvalues()(11 - k), 1e-9);
  }
  EXPECT_LE((pca.basis.transpose() * pca.basis - Matrix::Identity(6, 6)).norm(), 1e-8);
}

TEST(Pca, ExactOnRankTwoData) {
  std::mt19937_64 rng(3);
  const Matrix x = random_matrix(rng, 30, 2) * random_matrix(rng, 2, 50) + Matrix::Ones(30, 50);
  const PcaTransform pca = fit_pca(x, 2);
  const Matrix reconstructed = (pca.project(x) * pca.basis.transpose()).rowwise() + pca.mean.transpose();
  EXPECT_LE((reconstructed - x).norm(), 1e-10 * x.norm());
}

TEST(Pca, RejectsDimensionOutOfRange) {
  const Matrix x = Matrix::Random(5, 8);
  EXPECT_MLGD_ERROR(fit_pca(x, 5), ErrorKind::kConfiguration);
  EXPECT_MLGD_ERROR(fit_pca(x, 0), ErrorKind::kConfiguration);
}

TEST(Pca, ColumnSignsAreCanonical) {
  std::mt19937_64 rng(5);
  const PcaTransform pca = fit_pca(random_matrix(rng, 20, 9), 4);
  for (Eigen::Index c = 0; c < 4; ++c) {
    Eigen::Index arg = 0;
    pca.basis.col(c).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(pca.basis(arg, c), 0.0);
  }
}

TEST(Xqda, SeparableClustersAreRecognizedHeldIn) {
  std::mt19937_64 rng(7);
  const PairSet p = clustered_pairs(rng, 12, 20, 3.0, 0.1);
  const MetricModel m = fit_xqda(p);
  EXPECT_EQ(rank1_hits(score_matrix(m, p.view_a, p.view_b)), 12);
}

TEST(Xqda, EqualScattersKeepOnlyTheFloorDimension) {
  std::mt19937_64 rng(9);
  const Matrix a = random_matrix(rng, 30, 6);
  const Matrix s = a.transpose() * a / 30.0;
  const XqdaSubspace sub = xqda_subspace(s, s, 1e-3, 64);
  EXPECT_EQ(sub.projection.cols(), 1);
  EXPECT_LT(sub.eigenvalues(0), 1.0);
}

TEST(Xqda, ProjectionIsIntraWhitened) {
  std::mt19937_64 rng(11);
  const Matrix a = random_matrix(rng, 40, 8);
  const Matrix b = random_matrix(rng, 40, 8) * 3.0;
  const Matrix intra = a.transpose() * a / 40.0;
  const Matrix extra = b.transpose() * b / 40.0;
  const XqdaSubspace sub = xqda_subspace(intra, extra, 1e-3, 64);
  Matrix ridged = intra;
  ridged.diagonal().array() += 1e-3 * intra.trace() / 8.0;
  const Matrix gram = sub.projection.transpose() * ridged * sub.projection;
  EXPECT_LE((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_GT(sub.projection.cols(), 1);
  EXPECT_TRUE(std::is_sorted(sub.eigenvalues.data(), sub.eigenvalues.data() + sub.eigenvalues.size(),
                             std::greater<>()));
  EXPECT_GT(sub.eigenvalues.minCoeff(), 1.0);
}

TEST(Xqda, DimensionCapped) {
  std::mt19937_64 rng(13);
  const Matrix a = random_matrix(rng, 200, 80);
  const Matrix intra = a.transpose() * a / 200.0 * 0.01;
  const Matrix extra = a.transpose() * a / 200.0;
  EXPECT_EQ(xqda_subspace(intra, extra, 1e-3, 64).projection.cols(), 64);
  EXPECT_EQ(xqda_subspace(intra, extra, 1e-3, 5).projection.cols(), 5);
}

// Noise concentrated in a few axes: the learned metric must discount them.
TEST(Xqda, BeatsEuclideanUnderAnisotropicViewNoise) {
  std::mt19937_64 rng(15);
  const int d = 30;
  auto make = [&](int n) {
    PairSet p = clustered_pairs(rng, n, d, 1.0, 0.2);
    for (int j = 0; j < 5; ++j) {
      p.view_a.col(j) += random_matrix(rng, n, 1, 4.0);
      p.view_b.col(j) += random_matrix(rng, n, 1, 4.0);
    }
    return p;
  };
  const PairSet train = make(80);
  const PairSet test = make(40);
  MetricOptions o;
  o.pca_dim = 30;
  const int xqda = rank1_hits(score_matrix(fit_xqda(train, o), test.view_a, test.view_b));
  const int euclid = rank1_hits(score_matrix(make_euclidean(d), test.view_a, test.view_b));
  EXPECT_GT(xqda, euclid);
}

TEST(Xqda, DeterministicForSeed) {
  std::mt19937_64 rng(17);
  const PairSet p = clustered_pairs(rng, 30, 10, 1.0, 0.5);
  MetricOptions o;
  o.negative_ratio = 3;
  o.seed = 99;
  const MetricModel a = fit_xqda(p, o);
  const MetricModel b = fit_xqda(p, o);
  EXPECT_EQ(a.projection, b.projection);
  EXPECT_EQ(a.kernel, b.kernel);
}

TEST(Xqda, NeedsTwoIdentities) {
  PairSet p;
  p.view_a = Matrix::Ones(1, 3);
  p.view_b = Matrix::Ones(1, 3);
  p.labels_a = {0};
  p.labels_b = {0};
  EXPECT_MLGD_ERROR(fit_xqda(p), ErrorKind::kInsufficientData);
}

TEST(Kissme, SameDistributionGivesSmallKernel) {
  std::mt19937_64 rng(19);
  const Matrix s = random_matrix(rng, 20000, 4);
  const Matrix d = random_matrix(rng, 20000, 4);
  const Matrix m = kissme_kernel(s, d, 1e-3, false);
  const Matrix inv_s = (s.transpose() * s / 20000.0).inverse();
  EXPECT_LT(m.norm(), 0.1 * inv_s.norm());
}

TEST(Kissme, PsdClipRemovesNegativeSpectrum) {
  std::mt19937_64 rng(21);
  Matrix s = random_matrix(rng, 500, 5);
  Matrix d = random_matrix(rng, 500, 5);
  s.col(0) *= 3.0;  // similar pairs wider than dissimilar on axis 0
  const Matrix raw = kissme_kernel(s, d, 1e-3, false);
  const Matrix clipped = kissme_kernel(s, d, 1e-3, true);
  EXPECT_LT(Eigen::SelfAdjointEigenSolver<Matrix>(raw).eigenvalues().minCoeff(), 0.0);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(clipped).eigenvalues().minCoeff(), -1e-12);
}

TEST(Kissme, PenalizesTheAxisSimilarPairsDoNotUse) {
  std::mt19937_64 rng(23);
  const int n = 4000;
  Matrix s(n, 2), d(n, 2);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    s(i, 0) = g(rng);
    s(i, 1) = 0.05 * g(rng);
    d(i, 0) = g(rng);
    d(i, 1) = g(rng);
  }
  const Matrix m = kissme_kernel(s, d, 1e-3, true);
  EXPECT_GT(m(1, 1), 100.0 * std::abs(m(0, 0)));
}

TEST(Kissme, RankDeficientSimilarScatterIsRegularized) {
  std::mt19937_64 rng(25);
  const Matrix s = random_matrix(rng, 3, 8);  // rank 3 in 8 dimensions
  const Matrix d = random_matrix(rng, 100, 8);
  const Matrix m = kissme_kernel(s, d, 1e-3, true);
  EXPECT_TRUE(m.allFinite());
}

TEST(Lfda, SeparatesTwoClassesInOneDimension) {
  std::mt19937_64 rng(27);
  Matrix x = random_matrix(rng, 40, 6, 0.3);
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) {
    labels[i] = i < 20 ? 0 : 1;
    x(i, 2) += i < 20 ? -2.0 : 2.0;
  }
  MetricOptions o;
  o.lfda_dim = 1;
  const MetricModel m = fit_lfda(x, labels, o);
  const Matrix z = m.embed(x);
  ASSERT_EQ(z.cols(), 1);
  const double a_max = z.topRows(20).maxCoeff(), a_min = z.topRows(20).minCoeff();
  const double b_max = z.bottomRows(20).maxCoeff(), b_min = z.bottomRows(20).minCoeff();
  EXPECT_TRUE(a_max < b_min || b_max < a_min);
  EXPECT_LE((m.projection.transpose() * m.projection - Matrix::Identity(1, 1)).norm(), 1e-10);
}

TEST(Lfda, SingleSampleClassWarnsButFits) {
  std::mt19937_64 rng(29);
  const Matrix x = random_matrix(rng, 9, 4);
  const std::vector<int> labels{0, 0, 0, 0, 1, 1, 1, 1, 2};
  std::ostringstream captured;
  auto* old = std::clog.rdbuf(captured.rdbuf());
  MetricModel m;
  EXPECT_NO_THROW(m = fit_lfda(x, labels));
  std::clog.rdbuf(old);
  EXPECT_NE(captured.str().find("single-sample"), std::string::npos);
  EXPECT_EQ(m.kernel.rows(), m.projection.cols());
}

TEST(Score, EuclideanIsSquaredDistance) {
  const MetricModel m = make_euclidean(3);
  Vector a(3), b(3);
  a << 1, 2, 3;
  b << 0, 0, 1;
  EXPECT_DOUBLE_EQ(score(m, a, b), 1 + 4 + 4);
  EXPECT_MLGD_ERROR(score(m, Vector::Zero(2), b), ErrorKind::kContract);
}

TEST(Score, MatrixAgreesWithPairwise) {
  std::mt19937_64 rng(31);
  const PairSet p = clustered_pairs(rng, 15, 8, 1.0, 0.3);
  for (MetricKind k : {MetricKind::kXqda, MetricKind::kKissme, MetricKind::kLfda}) {
    const MetricModel m = fit_metric(k, p);
    const Matrix s = score_matrix(m, p.view_a, p.view_b);
    for (int i : {0, 7})
      for (int j : {3, 14})
        EXPECT_NEAR(s(i, j), score(m, p.view_a.row(i).transpose(), p.view_b.row(j).transpose()), 1e-9);
    EXPECT_GE(s.minCoeff(), -1e-9) << to_string(k);
  }
}

TEST(MetricKinds, ParseRoundTrip) {
  for (MetricKind k : {MetricKind::kEuclidean, MetricKind::kXqda, MetricKind::kKissme, MetricKind::kLfda})
    EXPECT_EQ(parse_metric_kind(to_string(k)), k);
  EXPECT_MLGD_ERROR(parse_metric_kind("svmml"), ErrorKind::kConfiguration);
}

}  // namespace
}  // namespace mlgd
