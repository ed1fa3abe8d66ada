#pragma once

#include "mlgd/error.hpp"
#include "mlgd/image.hpp"
#include "mlgd/spd_math.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string>

namespace mlgd::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

inline Matrix random_symmetric(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  const Matrix a = random_matrix(rng, n, n, scale);
  return 0.5 * (a + a.transpose());
}

// Q diag(exp(u)) Q^T with u uniform in [-spread, spread].
inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index n, double spread = 2.0) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n, n));
  const Matrix q = qr.householderQ();
  std::uniform_real_distribution<double> u(-spread, spread);
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = std::exp(u(rng));
  Matrix s = q * d.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

inline GaussianModel random_gaussian(std::mt19937_64& rng, Eigen::Index n) {
  return GaussianModel{random_matrix(rng, n, 1), random_spd(rng, n, 1.5)};
}

inline RgbImage random_image(std::mt19937_64& rng, int width = kStandardWidth, int height = kStandardHeight) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RgbImage img(width, height);
  for (auto& v : img.data) v = u(rng);
  return img;
}

// A scratch directory removed at scope exit.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("mlgd-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

#define EXPECT_MLGD_ERROR(statement, expected_kind)                                   \
  do {                                                                                \
    try {                                                                             \
      statement;                                                                      \
      ADD_FAILURE() << "expected mlgd::Error of kind " << ::mlgd::to_string(expected_kind); \
    } catch (const ::mlgd::Error& e) {                                                \
      EXPECT_EQ(e.kind(), expected_kind) << e.what();                                 \
    }                                                                                 \
  } while (false)

}  // namespace mlgd::testing
