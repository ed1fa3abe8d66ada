#include "mlgd/error.hpp"
#include "mlgd/parallel.hpp"
#include "mlgd/pipeline.hpp"
#include "mlgd/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

namespace mlgd {
namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string sets;
  std::string metric;
  std::optional<int> trials;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Seed for every randomized step");
  cmd->add_option("--threads", o.threads, "Worker threads (default: $MLGD_THREADS or all cores)");
}

PipelineConfig build_config(const CommonOptions& o) {
  PipelineConfig config = o.config_path.empty() ? PipelineConfig{} : load_config(o.config_path);
  if (o.seed) config.seed = *o.seed;
  if (!o.sets.empty()) config.feature_sets = parse_feature_sets(o.sets);
  if (!o.metric.empty()) config.metric = parse_metric_kind(o.metric);
  if (o.trials) config.trials = *o.trials;
  return config;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfiguration: return 3;
    case ErrorKind::kIo:
    case ErrorKind::kFormat: return 4;
    case ErrorKind::kProtocol:
    case ErrorKind::kInsufficientData:
    case ErrorKind::kContract: return 5;
    case ErrorKind::kNumerical:
    case ErrorKind::kSymmetryViolation:
    case ErrorKind::kNotSpd:
    case ErrorKind::kManifoldViolation: return 6;
    case ErrorKind::kDegenerateInput:
    case ErrorKind::kDegeneratePatch:
    case ErrorKind::kDegenerateRegion:
    case ErrorKind::kDegenerateDescriptor: return 7;
  }
  return 1;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
  } else {
    write_text_file(out_path, content);
  }
}

int cmd_extract(const CommonOptions& common, const std::string& manifest_path, const std::string& out) {
  const PipelineConfig config = build_config(common);
  const DatasetManifest manifest = parse_manifest(manifest_path);
  const auto start = std::chrono::steady_clock::now();
  const ExtractedSet extracted = extract_manifest(manifest, config, resolve_threads(common.threads));
  write_descriptor_cache(out, make_cache(manifest, extracted, descriptor_config_hash(config)));
  std::cout << "extracted " << extracted.rows.rows() << " descriptors of length " << extracted.rows.cols() << " in "
            << seconds_since(start) << " s -> " << out << "\n";
  return 0;
}

int cmd_train(const CommonOptions& common, const std::string& cache_path, const std::string& split_spec,
              const std::string& out) {
  const PipelineConfig config = build_config(common);
  const ConfigHash hash = descriptor_config_hash(config);
  const DescriptorCache cache = read_descriptor_cache(cache_path, hash);
  const DatasetManifest manifest = manifest_from_cache(cache, cache_path);
  const Matrix rows = descriptors_from_cache(manifest, cache);

  std::set<std::string> train_ids;
  Camera probe_camera = Camera::kA;
  if (split_spec == "all") {
    std::map<std::string, std::set<Camera>> cams;
    for (const auto& e : manifest.entries) cams[e.person_id].insert(e.camera);
    for (const auto& [id, c] : cams)
      if (c.size() == 2) train_ids.insert(id);
  } else if (split_spec.rfind("trial:", 0) == 0) {
    int trial = -1;
    try {
      trial = std::stoi(split_spec.substr(6));
    } catch (const std::exception&) {
      throw Error(ErrorKind::kConfiguration, "bad split spec '" + split_spec + "'");
    }
    const auto splits = generate_splits(manifest, make_eval_options(config, 1).split);
    if (trial < 0 || trial >= static_cast<int>(splits.size())) {
      throw Error(ErrorKind::kConfiguration, "split trial " + std::to_string(trial) + " out of range");
    }
    train_ids.insert(splits[static_cast<std::size_t>(trial)].train_ids.begin(), splits[static_cast<std::size_t>(trial)].train_ids.end());
    probe_camera = splits[static_cast<std::size_t>(trial)].probe_camera;
  } else {
    throw Error(ErrorKind::kConfiguration, "split spec must be 'all' or 'trial:K'");
  }

  std::vector<std::size_t> view_a, view_b;
  std::map<std::string, int> label_of;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    if (!train_ids.contains(e.person_id)) continue;
    label_of.emplace(e.person_id, static_cast<int>(label_of.size()));
    (e.camera == probe_camera ? view_a : view_b).push_back(i);
  }
  std::vector<std::size_t> order = view_a;
  order.insert(order.end(), view_b.begin(), view_b.end());
  Matrix train(static_cast<Eigen::Index>(order.size()), rows.cols());
  for (std::size_t i = 0; i < order.size(); ++i) train.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(order[i]));
  const NormalizedBatch norm = normalize_batch(train);

  PairSet pairs;
  pairs.view_a = norm.rows.topRows(static_cast<Eigen::Index>(view_a.size()));
  pairs.view_b = norm.rows.bottomRows(static_cast<Eigen::Index>(view_b.size()));
  for (std::size_t i : view_a) pairs.labels_a.push_back(label_of.at(manifest.entries[i].person_id));
  for (std::size_t i : view_b) pairs.labels_b.push_back(label_of.at(manifest.entries[i].person_id));
  MetricOptions mo = config.metric_options;
  mo.seed = config.seed;
  MetricModel model = fit_metric(config.metric, pairs, mo);
  model.train_mean = norm.mean;
  write_model(out, model, hash);
  std::cout << "trained " << to_string(model.kind) << " on " << train_ids.size() << " identities -> " << out << "\n";
  return 0;
}

int cmd_eval(const CommonOptions& common, const std::string& manifest_path, const std::string& cache_path,
             const std::string& out, const std::string& csv, bool timings) {
  const PipelineConfig config = build_config(common);
  const ConfigHash hash = descriptor_config_hash(config);
  const int threads = resolve_threads(common.threads);
  const DatasetManifest manifest = parse_manifest(manifest_path);

  const auto start = std::chrono::steady_clock::now();
  Matrix rows;
  if (!cache_path.empty()) {
    rows = descriptors_from_cache(manifest, read_descriptor_cache(cache_path, hash));
  } else {
    rows = extract_manifest(manifest, config, threads).rows;
  }
  const double extract_seconds = seconds_since(start);

  EvalReport report = evaluate(manifest, rows, make_eval_options(config, threads));
  report.config_hash = to_hex(hash);
  report.extract_seconds = extract_seconds;
  emit(out, report_json(report, timings));
  if (!csv.empty()) write_text_file(csv, report_csv(report));
  for (const auto& s : report.summary) {
    std::cerr << report.metric << " rank-" << s.rank << ": " << 100.0 * s.mean << "% (+/- " << 100.0 * s.ci95 << ")\n";
  }
  if (timings) std::cerr << "descriptor stage: " << extract_seconds << " s\n";
  return 0;
}

int cmd_retrieve(const CommonOptions& common, const std::string& query, const std::string& gallery_manifest,
                 const std::string& gallery_cache, const std::string& model_path, int top, const std::string& out) {
  const PipelineConfig config = build_config(common);
  const ConfigHash hash = descriptor_config_hash(config);
  const MetricModel model = read_model(model_path, hash);
  const DatasetManifest manifest = parse_manifest(gallery_manifest);
  const int threads = resolve_threads(common.threads);

  const Matrix gallery_raw = gallery_cache.empty() ? extract_manifest(manifest, config, threads).rows
                                                   : descriptors_from_cache(manifest, read_descriptor_cache(gallery_cache, hash));
  const auto sets = canonical_sets(config.feature_sets);
  const Vector query_raw =
      extract_descriptor(load_and_standardize(std::filesystem::path(query)), sets, config.descriptor).values.cast<float>().cast<double>();
  Matrix q(1, query_raw.size());
  q.row(0) = query_raw.transpose();
  const Vector query_norm = normalize_batch(q, model.train_mean).rows.row(0).transpose();
  const Matrix gallery = normalize_batch(gallery_raw, model.train_mean).rows;
  const auto hits = retrieve(model, query_norm, gallery, top);

  nlohmann::json results = nlohmann::json::array();
  for (std::size_t r = 0; r < hits.size(); ++r) {
    const auto& e = manifest.entries[hits[r].gallery_index];
    results.push_back({{"rank", r + 1},
                       {"image_path", e.image_path},
                       {"person_id", e.person_id},
                       {"camera", std::string(1, camera_letter(e.camera))},
                       {"score", hits[r].score}});
  }
  const nlohmann::json doc{{"query", query}, {"metric", std::string(to_string(model.kind))},
                           {"gallery_size", manifest.entries.size()}, {"results", results}};
  emit(out, doc.dump(2) + "\n");
  return 0;
}

int cmd_synth(const CommonOptions& common, int identities, const std::string& out_dir, const std::string& manifest_out) {
  SynthOptions so;
  so.identities = identities;
  so.seed = common.seed.value_or(0);
  DatasetManifest manifest = generate_synthetic_dataset(out_dir, so);
  const auto manifest_dir = std::filesystem::absolute(std::filesystem::path(manifest_out)).parent_path();
  std::filesystem::create_directories(manifest_dir);
  for (auto& e : manifest.entries) {
    e.image_path = std::filesystem::proximate(std::filesystem::absolute(e.resolved), manifest_dir).generic_string();
  }
  write_manifest(manifest_out, manifest);
  std::cout << "wrote " << manifest.entries.size() << " images of " << identities << " identities -> " << manifest_out
            << "\n";
  return 0;
}

int cmd_info(const std::string& cache, const std::string& model_path) {
  if (cache.empty() == model_path.empty()) throw Error(ErrorKind::kConfiguration, "give exactly one of --cache or --model");
  if (!cache.empty()) {
    const DescriptorCache c = read_descriptor_cache(cache);
    std::set<std::string> sets;
    for (const auto& b : c.layout) sets.insert(std::string(to_string(b.set)));
    std::cout << "type: descriptor-cache\nversion: " << kFormatVersion << "\nconfig_hash: " << to_hex(c.config_hash)
              << "\nvector_length: " << c.vector_length << "\nrecords: " << c.records.size()
              << "\nblocks: " << c.layout.size() << "\nfeature_sets:";
    for (FeatureSet s : kAllFeatureSets)
      if (sets.contains(std::string(to_string(s)))) std::cout << ' ' << to_string(s);
    std::cout << "\n";
  } else {
    ConfigHash hash{};
    const MetricModel m = read_model(model_path, std::nullopt, &hash);
    std::cout << "type: model\nversion: " << kFormatVersion << "\nconfig_hash: " << to_hex(hash)
              << "\nmetric: " << to_string(m.kind) << "\ninput_dim: " << m.input_dim
              << "\npca_dim: " << (m.pca ? m.pca->basis.cols() : 0)
              << "\nsubspace_dim: " << (m.projection.size() > 0 ? m.projection.cols() : (m.pca ? m.pca->basis.cols() : m.input_dim))
              << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Multi-level Gaussian descriptors for person re-identification"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string manifest, out, cache, split_spec = "all", csv, query, gallery_manifest, gallery_cache, model, out_dir,
                                    manifest_out, info_cache, info_model;
  int top = 10;
  int identities = 50;
  bool timings = false;

  auto* extract = app.add_subcommand("extract", "Describe every image of a manifest into a cache");
  add_common(extract, common);
  extract->add_option("--manifest", manifest, "CSV manifest or VIPeR directory")->required();
  extract->add_option("--out", out, "Descriptor cache to write")->required();
  extract->add_option("--sets", common.sets, "Feature sets, e.g. ycm,schmid,ygohsv,ygonrng");

  auto* train = app.add_subcommand("train", "Fit a metric on cached descriptors");
  add_common(train, common);
  train->add_option("--cache", cache, "Descriptor cache")->required();
  train->add_option("--split-spec", split_spec, "'all' or 'trial:K' (training half of split K)");
  train->add_option("--metric", common.metric, "xqda | kissme | lfda | euclidean");
  train->add_option("--sets", common.sets, "Feature sets the cache was built with");
  train->add_option("--trials", common.trials, "Trial count used to generate splits");
  train->add_option("--out", out, "Model file to write")->required();

  auto* eval = app.add_subcommand("eval", "Run the multi-trial CMC protocol");
  add_common(eval, common);
  eval->add_option("--manifest", manifest, "CSV manifest or VIPeR directory")->required();
  eval->add_option("--cache", cache, "Descriptor cache (extracted when absent)");
  eval->add_option("--metric", common.metric, "xqda | kissme | lfda | euclidean");
  eval->add_option("--sets", common.sets, "Feature sets");
  eval->add_option("--trials", common.trials, "Number of random splits");
  eval->add_option("--out", out, "JSON report (stdout when absent)");
  eval->add_option("--csv", csv, "CSV rank table");
  eval->add_flag("--timings", timings, "Include wall-clock timings in the JSON report");

  auto* ret = app.add_subcommand("retrieve", "Rank a gallery against one query image");
  add_common(ret, common);
  ret->add_option("--query", query, "Query image")->required()->check(CLI::ExistingFile);
  ret->add_option("--gallery-manifest", gallery_manifest, "Gallery manifest")->required();
  ret->add_option("--gallery-cache", gallery_cache, "Descriptor cache for the gallery");
  ret->add_option("--model", model, "Model file")->required();
  ret->add_option("--sets", common.sets, "Feature sets the model was trained on");
  ret->add_option("--top", top, "Number of results")->check(CLI::PositiveNumber);
  ret->add_option("--out", out, "JSON results (stdout when absent)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic two-camera dataset");
  add_common(synth, common);
  synth->add_option("--identities", identities, "Number of identities")->check(CLI::PositiveNumber);
  synth->add_option("--out-dir", out_dir, "Image directory")->required();
  synth->add_option("--manifest-out", manifest_out, "Manifest CSV to write")->required();

  auto* info = app.add_subcommand("info", "Print the header of a cache or model file");
  info->add_option("--cache", info_cache, "Descriptor cache");
  info->add_option("--model", info_model, "Model file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*extract) return cmd_extract(common, manifest, out);
    if (*train) return cmd_train(common, cache, split_spec, out);
    if (*eval) return cmd_eval(common, manifest, cache, out, csv, timings);
    if (*ret) return cmd_retrieve(common, query, gallery_manifest, gallery_cache, model, top, out);
    if (*synth) return cmd_synth(common, identities, out_dir, manifest_out);
    if (*info) return cmd_info(info_cache, info_model);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"mlgd"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace mlgd
