#include "mlgd/spd_math.hpp"

#include "mlgd/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace mlgd {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> eigen_of(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumerical, "self-adjoint eigensolver did not converge");
  }
  return solver;
}

Matrix apply_spectral(const Eigen::SelfAdjointEigenSolver<Matrix>& solver, const Vector& f) {
  const Matrix& u = solver.eigenvectors();
  Matrix out = u * f.asDiagonal() * u.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

void require_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::kSymmetryViolation, "matrix is not square");
  }
  if (a.size() == 0) return;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= rel_tol * scale)) {
    std::ostringstream msg;
    msg << "matrix asymmetry " << asym << " exceeds tolerance " << rel_tol * scale;
    throw Error(ErrorKind::kSymmetryViolation, msg.str());
  }
}

SpdMatrix::SpdMatrix(Matrix data) : data_(std::move(data)) {
  require_symmetric(data_);
  if (data_.rows() == 0) throw Error(ErrorKind::kNotSpd, "empty matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(data_, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success || !(solver.eigenvalues().minCoeff() > 0.0)) {
    throw Error(ErrorKind::kNotSpd, "matrix is not positive definite");
  }
}

Matrix regularize_covariance(const Matrix& sigma, double eps_rel) {
  require_symmetric(sigma);
  if (!(eps_rel > 0.0)) {
    throw Error(ErrorKind::kConfiguration, "ridge factor must be positive");
  }
  const auto n = sigma.rows();
  const double scale = std::max(sigma.trace() / static_cast<double>(n), kRidgeTraceFloor);
  Matrix out = sigma;
  out.diagonal().array() += eps_rel * scale;
  return out;
}

SpdMatrix embed_gaussian(const GaussianModel& g) {
  const auto n = g.dim();
  if (n == 0 || g.sigma.rows() != n || g.sigma.cols() != n) {
    throw Error(ErrorKind::kContract, "gaussian mean/covariance dimension mismatch");
  }
  require_symmetric(g.sigma);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(g.sigma, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success || !(solver.eigenvalues().minCoeff() > 0.0)) {
    throw Error(ErrorKind::kNotSpd, "covariance is singular or indefinite");
  }
  // |sigma| via the spectrum in log space; large covariances under/overflow otherwise.
  const double log_det = solver.eigenvalues().array().log().sum();
  const double scale = std::exp(-log_det / static_cast<double>(n + 1));

  Matrix s(n + 1, n + 1);
  s.topLeftCorner(n, n) = g.sigma + g.mu * g.mu.transpose();
  s.topRightCorner(n, 1) = g.mu;
  s.bottomLeftCorner(1, n) = g.mu.transpose();
  s(n, n) = 1.0;
  s *= scale;
  s = 0.5 * (s + s.transpose());
  return SpdMatrix(std::move(s));
}

Matrix log_map(const SpdMatrix& s) {
  const auto solver = eigen_of(s.data());
  const Vector& lambda = solver.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) {
    throw Error(ErrorKind::kManifoldViolation, "non-positive eigenvalue in matrix logarithm");
  }
  return apply_spectral(solver, lambda.array().log().matrix());
}

Matrix log_map_at(const SpdMatrix& s, const SpdMatrix& t) {
  if (s.dim() != t.dim()) {
    throw Error(ErrorKind::kContract, "tangency point dimension mismatch");
  }
  const auto t_solver = eigen_of(t.data());
  const Matrix t_inv_sqrt = apply_spectral(t_solver, t_solver.eigenvalues().array().rsqrt().matrix());
  Matrix whitened = t_inv_sqrt * s.data() * t_inv_sqrt;
  whitened = 0.5 * (whitened + whitened.transpose());
  return log_map(SpdMatrix(std::move(whitened)));
}

Matrix exp_map(const Matrix& a) {
  require_symmetric(a);
  const auto solver = eigen_of(a);
  return apply_spectral(solver, solver.eigenvalues().array().exp().matrix());
}

TangentVector half_vectorize(const Matrix& a) {
  require_symmetric(a);
  const auto d = a.rows();
  TangentVector out;
  out.source_dim = d;
  out.values.resize(d * (d + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    out.values[k++] = a(i, i);
    for (Eigen::Index j = i + 1; j < d; ++j) {
      out.values[k++] = std::numbers::sqrt2 * a(i, j);
    }
  }
  return out;
}

Matrix unvectorize(const TangentVector& v) {
  const auto d = v.source_dim;
  if (v.values.size() != d * (d + 1) / 2) {
    throw Error(ErrorKind::kContract, "tangent vector length does not match its source dimension");
  }
  Matrix a(d, d);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    a(i, i) = v.values[k++];
    for (Eigen::Index j = i + 1; j < d; ++j) {
      a(i, j) = a(j, i) = v.values[k++] / std::numbers::sqrt2;
    }
  }
  return a;
}

TangentVector gaussian_to_vector(const GaussianModel& g, const std::optional<SpdMatrix>& tangent_point) {
  const SpdMatrix embedded = embed_gaussian(g);
  if (tangent_point) return half_vectorize(log_map_at(embedded, *tangent_point));
  return half_vectorize(log_map(embedded));
}

GaussianModel sample_gaussian(const Eigen::Ref<const Matrix>& samples) {
  const auto count = samples.rows();
  if (count < 2) {
    throw Error(ErrorKind::kDegenerateInput, "at least two samples are needed for a covariance");
  }
  GaussianModel g;
  g.mu = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - g.mu.transpose();
  g.sigma = (centered.transpose() * centered) / static_cast<double>(count - 1);
  g.sigma = 0.5 * (g.sigma + g.sigma.transpose());
  return g;
}

}  // namespace mlgd
