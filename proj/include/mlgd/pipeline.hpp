#pragma once

// Glue between manifests, descriptor extraction, caches and evaluation.

#include "mlgd/config.hpp"
#include "mlgd/evaluation.hpp"
#include "mlgd/persistence.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mlgd {

struct ExtractedSet {
  Matrix rows;  // one raw descriptor per manifest entry, at 32-bit storage precision
  std::vector<DescriptorBlock> layout;
};

/// Loads, standardizes and describes every manifest image on `threads`
/// workers. Values are rounded to float so that a cold run and a cached run
/// see identical numbers.
ExtractedSet extract_manifest(const DatasetManifest& manifest, const PipelineConfig& config, int threads);

DescriptorCache make_cache(const DatasetManifest& manifest, const ExtractedSet& extracted, const ConfigHash& hash);

/// Rows of the cache in manifest order, matched by image id.
Matrix descriptors_from_cache(const DatasetManifest& manifest, const DescriptorCache& cache);

/// A manifest view of the cache records (image ids as paths).
DatasetManifest manifest_from_cache(const DescriptorCache& cache, const std::string& name);

EvalOptions make_eval_options(const PipelineConfig& config, int threads);

/// CLI entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace mlgd
