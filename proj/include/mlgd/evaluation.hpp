#pragma once

// Identity-level split protocol, CMC scoring, cross-trial reports, and top-k
// retrieval.

#include "mlgd/manifest.hpp"
#include "mlgd/metric_learning.hpp"
#include "mlgd/spd_math.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mlgd {

struct SplitOptions {
  int trials = 10;
  std::uint64_t seed = 0;
  /// Paired identities used for training; 0 selects ceil(P/2).
  int train_identities = 0;
  /// Draw the probe camera per trial; otherwise camera A is always the probe.
  bool randomize_probe_camera = true;
};

/// One random partition of the identities seen in both cameras.
/// Identities seen in a single camera are gallery-only distractors.
struct EvalSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<std::string> distractor_ids;
  Camera probe_camera = Camera::kA;
  int trial_index = 0;
  std::uint64_t seed = 0;
};

std::vector<EvalSplit> generate_splits(const DatasetManifest& manifest, const SplitOptions& options = {});

/// rates[k-1] = fraction of probes whose identity appears at rank <= k.
struct CmcCurve {
  std::vector<double> rates;
  int trials_averaged = 1;

  double at_rank(int k) const;
};

/// Gallery ranked by ascending score with ties broken by gallery index; a
/// probe is credited at the rank of its best-ranked correct gallery item.
CmcCurve compute_cmc(const Matrix& scores, const std::vector<int>& probe_ids, const std::vector<int>& gallery_ids);

/// 1-based rank of each probe's first correct match under the same ordering.
std::vector<int> match_ranks(const Matrix& scores, const std::vector<int>& probe_ids,
                             const std::vector<int>& gallery_ids);

struct RankSummary {
  int rank = 1;
  double mean = 0.0;
  double ci95 = 0.0;  // half-width, 1.96 * sd / sqrt(trials)
};

struct TrialResult {
  int trial_index = 0;
  std::uint64_t seed = 0;
  Camera probe_camera = Camera::kA;
  int train_identities = 0;
  int probes = 0;
  int gallery_size = 0;
  CmcCurve cmc;
  double fit_seconds = 0.0;
  double score_seconds = 0.0;
};

struct EvalReport {
  std::string dataset;
  std::string metric;
  std::string config_hash;
  std::uint64_t seed = 0;
  CmcCurve mean_cmc;  // truncated to the shortest trial gallery
  std::vector<RankSummary> summary;  // ranks 1, 10, 20 (clamped to the gallery size)
  std::vector<TrialResult> trials;
  double extract_seconds = 0.0;
};

struct EvalOptions {
  MetricKind metric = MetricKind::kXqda;
  MetricOptions metric_options;
  SplitOptions split;
  /// Keep one random image per (person, camera) in each trial.
  bool single_shot = false;
  int threads = 1;
};

/// Runs every trial on precomputed raw descriptors (row i belongs to
/// manifest.entries[i]). Each trial normalizes with its training mean, fits
/// the metric on training identities and scores test probes against the test
/// gallery plus distractors.
EvalReport evaluate(const DatasetManifest& manifest, const Matrix& descriptors, const EvalOptions& options);

/// Mean curve over trials, truncated to the shortest curve.
CmcCurve average_cmc(const std::vector<CmcCurve>& curves);

struct RetrievalHit {
  std::size_t gallery_index = 0;
  double score = 0.0;
};

/// Top-k gallery rows for one normalized query, ascending score with stable
/// index tie-breaking. k larger than the gallery returns the whole gallery.
std::vector<RetrievalHit> retrieve(const MetricModel& model, const Vector& query, const Matrix& gallery, int k = 10);

}  // namespace mlgd
