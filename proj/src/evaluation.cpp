#include "mlgd/evaluation.hpp"

#include "mlgd/descriptor.hpp"
#include "mlgd/error.hpp"
#include "mlgd/parallel.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace mlgd {
namespace {

// Fisher-Yates with raw engine output so the permutation does not depend on
// the standard library's distribution implementations.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = rng() % i;
    std::swap(items[i - 1], items[j]);
  }
}

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<EvalSplit> generate_splits(const DatasetManifest& manifest, const SplitOptions& options) {
  if (options.trials < 1) throw Error(ErrorKind::kConfiguration, "trial count must be positive");
  std::map<std::string, std::set<Camera>> cameras;
  for (const auto& e : manifest.entries) cameras[e.person_id].insert(e.camera);
  std::vector<std::string> paired;
  std::vector<std::string> distractors;
  for (const auto& [id, cams] : cameras) (cams.size() == 2 ? paired : distractors).push_back(id);

  const auto total = static_cast<int>(paired.size());
  const int train = options.train_identities > 0 ? options.train_identities : (total + 1) / 2;
  if (total < 4 || train < 2 || total - train < 1) {
    throw Error(ErrorKind::kProtocol, "too few identities seen in both cameras (" + std::to_string(total) +
                                          ") for a " + std::to_string(train) + "-identity training split");
  }

  std::mt19937_64 rng(options.seed);
  std::vector<EvalSplit> splits;
  for (int t = 0; t < options.trials; ++t) {
    std::vector<std::string> order = paired;
    seeded_shuffle(order, rng);
    EvalSplit split;
    split.trial_index = t;
    split.seed = trial_seed(options.seed, t);
    split.train_ids.assign(order.begin(), order.begin() + train);
    split.test_ids.assign(order.begin() + train, order.end());
    std::sort(split.train_ids.begin(), split.train_ids.end());
    std::sort(split.test_ids.begin(), split.test_ids.end());
    split.distractor_ids = distractors;
    split.probe_camera = options.randomize_probe_camera && (rng() & 1U) ? Camera::kB : Camera::kA;
    splits.push_back(std::move(split));
  }
  return splits;
}

double CmcCurve::at_rank(int k) const {
  if (rates.empty()) return 0.0;
  k = std::clamp<int>(k, 1, static_cast<int>(rates.size()));
  return rates[static_cast<std::size_t>(k - 1)];
}

std::vector<int> match_ranks(const Matrix& scores, const std::vector<int>& probe_ids,
                             const std::vector<int>& gallery_ids) {
  if (static_cast<std::size_t>(scores.rows()) != probe_ids.size() ||
      static_cast<std::size_t>(scores.cols()) != gallery_ids.size()) {
    throw Error(ErrorKind::kContract, "score matrix shape does not match the id lists");
  }
  std::vector<int> ranks(probe_ids.size());
  for (Eigen::Index p = 0; p < scores.rows(); ++p) {
    Eigen::Index best = -1;
    for (Eigen::Index g = 0; g < scores.cols(); ++g) {
      if (gallery_ids[static_cast<std::size_t>(g)] != probe_ids[static_cast<std::size_t>(p)]) continue;
      if (best < 0 || scores(p, g) < scores(p, best)) best = g;
    }
    if (best < 0) {
      throw Error(ErrorKind::kProtocol,
                  "probe " + std::to_string(p) + " has no matching identity in the gallery");
    }
    const double s = scores(p, best);
    int ahead = 0;
    for (Eigen::Index g = 0; g < scores.cols(); ++g) {
      if (scores(p, g) < s || (scores(p, g) == s && g < best)) ++ahead;
    }
    ranks[static_cast<std::size_t>(p)] = ahead + 1;
  }
  return ranks;
}

CmcCurve compute_cmc(const Matrix& scores, const std::vector<int>& probe_ids, const std::vector<int>& gallery_ids) {
  const auto ranks = match_ranks(scores, probe_ids, gallery_ids);
  CmcCurve cmc;
  cmc.rates.assign(static_cast<std::size_t>(scores.cols()), 0.0);
  if (ranks.empty()) return cmc;
  std::vector<int> hist(static_cast<std::size_t>(scores.cols()) + 1, 0);
  for (int r : ranks) ++hist[static_cast<std::size_t>(r)];
  int cumulative = 0;
  for (std::size_t k = 1; k < hist.size(); ++k) {
    cumulative += hist[k];
    cmc.rates[k - 1] = static_cast<double>(cumulative) / static_cast<double>(ranks.size());
  }
  return cmc;
}

CmcCurve average_cmc(const std::vector<CmcCurve>& curves) {
  CmcCurve out;
  if (curves.empty()) return out;
  std::size_t len = curves.front().rates.size();
  for (const auto& c : curves) len = std::min(len, c.rates.size());
  out.rates.assign(len, 0.0);
  int trials = 0;
  for (const auto& c : curves) {
    for (std::size_t k = 0; k < len; ++k) out.rates[k] += c.rates[k] * c.trials_averaged;
    trials += c.trials_averaged;
  }
  for (double& r : out.rates) r /= static_cast<double>(trials);
  out.trials_averaged = trials;
  return out;
}

namespace {

struct TrialData {
  std::vector<std::size_t> train_a, train_b;  // probe-camera / gallery-camera training images
  std::vector<std::size_t> probes, gallery;
};

TrialData select_images(const DatasetManifest& manifest, const EvalSplit& split, bool single_shot) {
  const std::set<std::string> train(split.train_ids.begin(), split.train_ids.end());
  const std::set<std::string> test(split.test_ids.begin(), split.test_ids.end());
  const std::set<std::string> distractors(split.distractor_ids.begin(), split.distractor_ids.end());

  std::vector<std::size_t> usable(manifest.entries.size());
  std::iota(usable.begin(), usable.end(), std::size_t{0});
  if (single_shot) {
    std::map<std::pair<std::string, Camera>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i)
      groups[{manifest.entries[i].person_id, manifest.entries[i].camera}].push_back(i);
    std::mt19937_64 rng(split.seed ^ 0x5eedULL);
    usable.clear();
    for (const auto& [key, members] : groups) {
      if (distractors.contains(key.first)) {
        usable.insert(usable.end(), members.begin(), members.end());
      } else {
        usable.push_back(members[rng() % members.size()]);
      }
    }
    std::sort(usable.begin(), usable.end());
  }

  TrialData data;
  for (std::size_t i : usable) {
    const auto& e = manifest.entries[i];
    const bool probe_side = e.camera == split.probe_camera;
    if (train.contains(e.person_id)) {
      (probe_side ? data.train_a : data.train_b).push_back(i);
    } else if (test.contains(e.person_id)) {
      (probe_side ? data.probes : data.gallery).push_back(i);
    } else if (distractors.contains(e.person_id)) {
      data.gallery.push_back(i);
    }
  }
  return data;
}

Matrix gather(const Matrix& rows, const std::vector<std::size_t>& index) {
  Matrix out(static_cast<Eigen::Index>(index.size()), rows.cols());
  for (std::size_t i = 0; i < index.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(index[i]));
  return out;
}

std::vector<double> summary_stats(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, 1.96 * sd / std::sqrt(n)};
}

TrialResult run_trial(const DatasetManifest& manifest, const Matrix& descriptors, const EvalSplit& split,
                      const EvalOptions& options) {
  const TrialData data = select_images(manifest, split, options.single_shot);
  if (data.probes.empty() || data.gallery.empty()) {
    throw Error(ErrorKind::kProtocol, "trial has an empty probe set or gallery");
  }

  std::map<std::string, int> label_of;
  for (const auto& e : manifest.entries) label_of.emplace(e.person_id, static_cast<int>(label_of.size()));
  const auto labels = [&](const std::vector<std::size_t>& index) {
    std::vector<int> out;
    for (std::size_t i : index) out.push_back(label_of.at(manifest.entries[i].person_id));
    return out;
  };

  const auto fit_start = std::chrono::steady_clock::now();
  std::vector<std::size_t> train_all = data.train_a;
  train_all.insert(train_all.end(), data.train_b.begin(), data.train_b.end());
  const NormalizedBatch train = normalize_batch(gather(descriptors, train_all));
  const auto na = static_cast<Eigen::Index>(data.train_a.size());

  PairSet pairs;
  pairs.view_a = train.rows.topRows(na);
  pairs.view_b = train.rows.bottomRows(train.rows.rows() - na);
  pairs.labels_a = labels(data.train_a);
  pairs.labels_b = labels(data.train_b);
  MetricOptions metric_options = options.metric_options;
  metric_options.seed = split.seed;
  MetricModel model = fit_metric(options.metric, pairs, metric_options);
  model.train_mean = train.mean;
  TrialResult result;
  result.fit_seconds = seconds_since(fit_start);

  const auto score_start = std::chrono::steady_clock::now();
  const Matrix probes = normalize_batch(gather(descriptors, data.probes), train.mean).rows;
  const Matrix gallery = normalize_batch(gather(descriptors, data.gallery), train.mean).rows;
  const Matrix scores = score_matrix(model, probes, gallery);
  result.cmc = compute_cmc(scores, labels(data.probes), labels(data.gallery));
  result.score_seconds = seconds_since(score_start);

  result.trial_index = split.trial_index;
  result.seed = split.seed;
  result.probe_camera = split.probe_camera;
  result.train_identities = static_cast<int>(split.train_ids.size());
  result.probes = static_cast<int>(data.probes.size());
  result.gallery_size = static_cast<int>(data.gallery.size());
  return result;
}

}  // namespace

EvalReport evaluate(const DatasetManifest& manifest, const Matrix& descriptors, const EvalOptions& options) {
  if (static_cast<std::size_t>(descriptors.rows()) != manifest.entries.size()) {
    throw Error(ErrorKind::kContract, "descriptor rows do not match manifest entries");
  }
  const auto splits = generate_splits(manifest, options.split);
  std::vector<TrialResult> results(splits.size());
  parallel_for(splits.size(), options.threads, [&](std::size_t t) {
    try {
      results[t] = run_trial(manifest, descriptors, splits[t], options);
    } catch (const Error& e) {
      throw Error(e.kind(), "trial " + std::to_string(t) + ": " + e.what());
    }
  });

  EvalReport report;
  report.dataset = manifest.name;
  report.metric = std::string(to_string(options.metric));
  report.seed = options.split.seed;
  std::vector<CmcCurve> curves;
  for (const auto& r : results) curves.push_back(r.cmc);
  report.mean_cmc = average_cmc(curves);
  const int gallery = static_cast<int>(report.mean_cmc.rates.size());
  std::vector<int> ranks;
  for (int k : {1, 10, 20}) {
    const int clamped = std::min(k, gallery);
    if (ranks.empty() || ranks.back() != clamped) ranks.push_back(clamped);
  }
  for (int k : ranks) {
    std::vector<double> values;
    for (const auto& r : results) values.push_back(r.cmc.at_rank(k));
    const auto stats = summary_stats(values);
    report.summary.push_back({k, stats[0], stats[1]});
  }
  report.trials = std::move(results);
  return report;
}

std::vector<RetrievalHit> retrieve(const MetricModel& model, const Vector& query, const Matrix& gallery, int k) {
  if (gallery.rows() == 0) throw Error(ErrorKind::kProtocol, "empty gallery");
  if (k < 1) throw Error(ErrorKind::kConfiguration, "top-k must be positive");
  Matrix q(1, query.size());
  q.row(0) = query.transpose();
  const Matrix scores = score_matrix(model, q, gallery);
  std::vector<RetrievalHit> hits(static_cast<std::size_t>(gallery.rows()));
  for (Eigen::Index g = 0; g < gallery.rows(); ++g) hits[static_cast<std::size_t>(g)] = {static_cast<std::size_t>(g), scores(0, g)};
  std::stable_sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) { return a.score < b.score; });
  hits.resize(std::min<std::size_t>(hits.size(), static_cast<std::size_t>(k)));
  return hits;
}

}  // namespace mlgd
