#include "mlgd/pipeline.hpp"

#include "mlgd/error.hpp"
#include "mlgd/parallel.hpp"

#include <cstdlib>
#include <map>

namespace mlgd {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MLGD_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

ExtractedSet extract_manifest(const DatasetManifest& manifest, const PipelineConfig& config, int threads) {
  const auto sets = canonical_sets(config.feature_sets);
  ExtractedSet out;
  out.rows.resize(static_cast<Eigen::Index>(manifest.entries.size()), descriptor_length(sets, config.descriptor));
  std::vector<std::vector<DescriptorBlock>> layouts(manifest.entries.size());
  parallel_for(manifest.entries.size(), threads, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    Descriptor d = extract_descriptor(load_and_standardize(entry.resolved), sets, config.descriptor);
    out.rows.row(static_cast<Eigen::Index>(i)) = d.values.cast<float>().cast<double>().transpose();
    layouts[i] = std::move(d.layout);
  });
  if (!layouts.empty()) out.layout = std::move(layouts.front());
  return out;
}

DescriptorCache make_cache(const DatasetManifest& manifest, const ExtractedSet& extracted, const ConfigHash& hash) {
  DescriptorCache cache;
  cache.config_hash = hash;
  cache.layout = extracted.layout;
  cache.vector_length = extracted.rows.cols();
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    cache.records.push_back({e.image_path, e.person_id, e.camera, extracted.rows.row(static_cast<Eigen::Index>(i)).transpose().cast<float>()});
  }
  return cache;
}

Matrix descriptors_from_cache(const DatasetManifest& manifest, const DescriptorCache& cache) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < cache.records.size(); ++i) index.emplace(cache.records[i].image_id, i);
  Matrix rows(static_cast<Eigen::Index>(manifest.entries.size()), cache.vector_length);
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto it = index.find(manifest.entries[i].image_path);
    if (it == index.end()) {
      throw Error(ErrorKind::kProtocol, "image " + manifest.entries[i].image_path + " is not in the descriptor cache");
    }
    rows.row(static_cast<Eigen::Index>(i)) = cache.records[it->second].values.cast<double>().transpose();
  }
  return rows;
}

DatasetManifest manifest_from_cache(const DescriptorCache& cache, const std::string& name) {
  DatasetManifest manifest;
  manifest.name = name;
  for (const auto& r : cache.records) manifest.entries.push_back({r.image_id, r.image_id, r.person_id, r.camera});
  return manifest;
}

EvalOptions make_eval_options(const PipelineConfig& config, int threads) {
  EvalOptions o;
  o.metric = config.metric;
  o.metric_options = config.metric_options;
  o.metric_options.seed = config.seed;
  o.split.trials = config.trials;
  o.split.seed = config.seed;
  o.split.train_identities = config.train_identities;
  o.split.randomize_probe_camera = config.randomize_probe_camera;
  o.single_shot = config.single_shot;
  o.threads = threads;
  return o;
}

}  // namespace mlgd
