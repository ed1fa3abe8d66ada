#pragma once

// Gaussian <-> SPD embedding and the log-Euclidean flattening used at both
// levels of the descriptor. All routines are pure and thread-safe.

#include <Eigen/Dense>

#include <optional>

namespace mlgd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Mean and covariance of an n-dimensional Gaussian.
struct GaussianModel {
  Vector mu;
  Matrix sigma;

  Eigen::Index dim() const { return mu.size(); }
};

/// Symmetric positive-definite matrix. Construction checks the spectrum.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix data);

  const Matrix& data() const { return data_; }
  Eigen::Index dim() const { return data_.rows(); }

 private:
  Matrix data_;
};

/// Orthonormal coordinates of a symmetric d x d matrix, length d(d+1)/2.
struct TangentVector {
  Vector values;
  Eigen::Index source_dim = 0;
};

inline constexpr double kDefaultRidge = 1e-3;
inline constexpr double kRidgeTraceFloor = 1e-8;
inline constexpr double kSymmetryTolerance = 1e-12;

/// Throws kSymmetryViolation when |A - A^T| exceeds the relative tolerance.
void require_symmetric(const Matrix& a, double rel_tol = kSymmetryTolerance);

/// sigma + eps_rel * max(trace/n, 1e-8) * I.
Matrix regularize_covariance(const Matrix& sigma, double eps_rel = kDefaultRidge);

/// Embeds N(mu, sigma) as the unit-determinant (n+1)x(n+1) matrix
/// |sigma|^(-1/(n+1)) [[sigma + mu mu^T, mu], [mu^T, 1]].
SpdMatrix embed_gaussian(const GaussianModel& g);

/// Principal matrix logarithm through the self-adjoint eigendecomposition.
Matrix log_map(const SpdMatrix& s);

/// Logarithm at a tangency point t: log(t^{-1/2} s t^{-1/2}). Reduces to
/// log_map when t is the identity.
Matrix log_map_at(const SpdMatrix& s, const SpdMatrix& t);

/// Inverse of log_map for symmetric input (used for reconstruction).
Matrix exp_map(const Matrix& a);

/// Upper triangle in row-major order, off-diagonal entries scaled by sqrt(2)
/// so that dot(v(A), v(B)) equals the Frobenius inner product <A, B>.
TangentVector half_vectorize(const Matrix& a);

/// Inverse of half_vectorize.
Matrix unvectorize(const TangentVector& v);

/// half_vectorize(log(embed_gaussian(g))). With a tangency point the log is
/// taken at that point instead of the identity.
TangentVector gaussian_to_vector(const GaussianModel& g,
                                 const std::optional<SpdMatrix>& tangent_point = std::nullopt);

/// Length of gaussian_to_vector for an n-dimensional Gaussian: (n^2+3n)/2 + 1.
constexpr Eigen::Index gaussian_vector_length(Eigen::Index n) { return (n * n + 3 * n) / 2 + 1; }

/// Sample mean and (N-1)-normalized covariance of the rows of `samples`.
GaussianModel sample_gaussian(const Eigen::Ref<const Matrix>& samples);

}  // namespace mlgd
