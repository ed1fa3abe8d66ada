#pragma once

#include "mlgd/descriptor.hpp"
#include "mlgd/metric_learning.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mlgd {

/// Every tunable of the pipeline. Defaults reproduce the reference setting:
/// 5x5 patches with stride 2, seven 32-row strips, 13 Schmid filters and the
/// four feature sets fused at descriptor level.
struct PipelineConfig {
  std::vector<FeatureSet> feature_sets{std::begin(kAllFeatureSets), std::end(kAllFeatureSets)};
  DescriptorOptions descriptor;
  MetricKind metric = MetricKind::kXqda;
  MetricOptions metric_options;
  std::uint64_t seed = 0;
  int trials = 10;
  int train_identities = 0;
  bool randomize_probe_camera = true;
  bool single_shot = false;
};

using ConfigHash = std::array<std::uint8_t, 32>;

/// SHA-256 over the canonical JSON of everything that shapes a descriptor
/// (feature sets, descriptor options, frame size). Metric settings are not part
/// of the hash, so one descriptor cache serves every metric.
ConfigHash descriptor_config_hash(const PipelineConfig& config);
std::string to_hex(const ConfigHash& hash);

/// Canonical JSON text of the full configuration.
std::string config_to_json(const PipelineConfig& config);
/// Parses JSON produced by config_to_json; absent keys keep their defaults,
/// unknown keys are rejected.
PipelineConfig config_from_json(const std::string& text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Comma-separated feature-set list, e.g. "ycm,schmid".
std::vector<FeatureSet> parse_feature_sets(const std::string& list);

}  // namespace mlgd
