#pragma once

// Versioned little-endian binary formats.
//
// Common header:
//   char[4]  magic "MLGD"
//   u32      format version (1)
//   u32      file type (1 = descriptor cache, 2 = metric model)
//   u8[32]   config hash
//
// Descriptor cache body:
//   u32 block count, then per block: u8 feature set, u32 region, u64 offset, u64 length
//   u64 vector length, u64 record count
//   records: char[256] image id, char[64] person id, u8 camera, u8[3] zero, f32[length]
//
// Model body:
//   u32 metric kind, u64 input dim, u8 has_pca
//   [f64 vector pca mean, f64 matrix pca basis, f64 vector pca eigenvalues]
//   f64 matrix W, f64 matrix M, f64 vector training mean
//   vector = u64 n, f64[n]; matrix = u64 rows, u64 cols, f64[rows*cols] column-major

#include "mlgd/config.hpp"
#include "mlgd/descriptor.hpp"
#include "mlgd/evaluation.hpp"
#include "mlgd/manifest.hpp"
#include "mlgd/metric_learning.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mlgd {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kImageIdBytes = 256;
inline constexpr std::size_t kPersonIdBytes = 64;

enum class FileType : std::uint32_t { kDescriptorCache = 1, kModel = 2 };

struct CacheRecord {
  std::string image_id;
  std::string person_id;
  Camera camera = Camera::kA;
  Eigen::VectorXf values;
};

struct DescriptorCache {
  ConfigHash config_hash{};
  std::vector<DescriptorBlock> layout;
  Eigen::Index vector_length = 0;
  std::vector<CacheRecord> records;
};

struct FileHeader {
  FileType type = FileType::kDescriptorCache;
  std::uint32_t version = kFormatVersion;
  ConfigHash config_hash{};
};

void write_descriptor_cache(const std::filesystem::path& path, const DescriptorCache& cache);
/// Rejects bad magic, unknown versions, truncation and, when `expected_hash` is
/// given, a config-hash mismatch.
DescriptorCache read_descriptor_cache(const std::filesystem::path& path,
                                      const std::optional<ConfigHash>& expected_hash = std::nullopt);

void write_model(const std::filesystem::path& path, const MetricModel& model, const ConfigHash& config_hash);
MetricModel read_model(const std::filesystem::path& path, const std::optional<ConfigHash>& expected_hash = std::nullopt,
                       ConfigHash* stored_hash = nullptr);

FileHeader read_header(const std::filesystem::path& path);

/// Full report: per-trial curves, mean curve, rank summary.
/// Timings are included only on request so repeated runs stay byte-identical.
std::string report_json(const EvalReport& report, bool include_timings = false);
/// rank,mean,ci95 for every rank of the mean curve.
std::string report_csv(const EvalReport& report);

/// Writes `content` to `path` atomically (temporary file + rename).
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace mlgd
