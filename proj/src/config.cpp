#include "mlgd/config.hpp"

#include "mlgd/error.hpp"
#include "mlgd/image.hpp"

#include <json.hpp>
#include <openssl/sha.h>

#include <fstream>
#include <set>
#include <sstream>

namespace mlgd {
namespace {

using nlohmann::json;

json descriptor_json(const PipelineConfig& c) {
  const auto& d = c.descriptor;
  json sets = json::array();
  for (FeatureSet s : canonical_sets(c.feature_sets)) sets.push_back(std::string(to_string(s)));
  return json{
      {"feature_sets", sets},
      {"frame_width", kStandardWidth},
      {"frame_height", kStandardHeight},
      {"patch_size", d.patch_size},
      {"patch_stride", d.patch_stride},
      {"region_count", d.region_count},
      {"region_height", d.region_height},
      {"region_stride", d.region_stride},
      {"patch_ridge", d.patch_ridge},
      {"region_ridge", d.region_ridge},
      {"schmid_region_ridge", d.schmid_region_ridge},
      {"fusion", d.fusion == FusionMode::kPixel ? "pixel" : "descriptor"},
      {"row_coordinate", d.pixel.row_coordinate == RowCoordinate::kAbsolute ? "absolute" : "normalized"},
      {"schmid_variant", d.pixel.schmid_variant == SchmidVariant::kClassical ? "classical" : "as_printed"},
      {"moment_window", d.pixel.moment_window},
      {"schmid_pool_block", d.pixel.schmid_pool_block},
  };
}

json metric_json(const PipelineConfig& c) {
  const auto& m = c.metric_options;
  return json{
      {"kind", std::string(to_string(c.metric))},
      {"pca_dim", m.pca_dim},
      {"pca_cap", m.pca_cap},
      {"xqda_use_pca", m.xqda_use_pca},
      {"xqda_ridge", m.xqda_ridge},
      {"xqda_max_dim", m.xqda_max_dim},
      {"kissme_ridge", m.kissme_ridge},
      {"psd_clip", m.psd_clip},
      {"lfda_neighbors", m.lfda_neighbors},
      {"lfda_dim", m.lfda_dim},
      {"lfda_ridge", m.lfda_ridge},
      {"negative_ratio", m.negative_ratio},
  };
}

template <typename T>
void take(const json& obj, const char* key, T& out, std::set<std::string>& seen) {
  seen.insert(key);
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfiguration, std::string("config key '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!known.contains(item.key())) {
      throw Error(ErrorKind::kConfiguration, "unknown config key '" + where + item.key() + "'");
    }
  }
}

}  // namespace

std::vector<FeatureSet> parse_feature_sets(const std::string& list) {
  std::vector<FeatureSet> out;
  std::istringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(parse_feature_set(item));
  }
  return canonical_sets(out);
}

std::string config_to_json(const PipelineConfig& c) {
  json j{
      {"descriptor", descriptor_json(c)},
      {"metric", metric_json(c)},
      {"seed", c.seed},
      {"trials", c.trials},
      {"train_identities", c.train_identities},
      {"randomize_probe_camera", c.randomize_probe_camera},
      {"single_shot", c.single_shot},
  };
  return j.dump(2);
}

PipelineConfig config_from_json(const std::string& text, PipelineConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfiguration, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kConfiguration, "config must be a JSON object");
  std::set<std::string> top;
  take(j, "seed", c.seed, top);
  take(j, "trials", c.trials, top);
  take(j, "train_identities", c.train_identities, top);
  take(j, "randomize_probe_camera", c.randomize_probe_camera, top);
  take(j, "single_shot", c.single_shot, top);
  top.insert("descriptor");
  top.insert("metric");
  reject_unknown(j, top, "");

  if (j.contains("descriptor")) {
    const json& d = j.at("descriptor");
    std::set<std::string> seen{"frame_width", "frame_height"};
    if (d.contains("frame_width") && d.at("frame_width") != kStandardWidth) {
      throw Error(ErrorKind::kConfiguration, "frame width is fixed at 48");
    }
    if (d.contains("frame_height") && d.at("frame_height") != kStandardHeight) {
      throw Error(ErrorKind::kConfiguration, "frame height is fixed at 128");
    }
    std::vector<std::string> sets;
    take(d, "feature_sets", sets, seen);
    if (d.contains("feature_sets")) {
      std::vector<FeatureSet> parsed;
      for (const auto& s : sets) parsed.push_back(parse_feature_set(s));
      c.feature_sets = canonical_sets(parsed);
    }
    auto& o = c.descriptor;
    take(d, "patch_size", o.patch_size, seen);
    take(d, "patch_stride", o.patch_stride, seen);
    take(d, "region_count", o.region_count, seen);
    take(d, "region_height", o.region_height, seen);
    take(d, "region_stride", o.region_stride, seen);
    take(d, "patch_ridge", o.patch_ridge, seen);
    take(d, "region_ridge", o.region_ridge, seen);
    take(d, "schmid_region_ridge", o.schmid_region_ridge, seen);
    take(d, "moment_window", o.pixel.moment_window, seen);
    take(d, "schmid_pool_block", o.pixel.schmid_pool_block, seen);
    std::string fusion = o.fusion == FusionMode::kPixel ? "pixel" : "descriptor";
    take(d, "fusion", fusion, seen);
    if (fusion != "pixel" && fusion != "descriptor") throw Error(ErrorKind::kConfiguration, "fusion must be pixel or descriptor");
    o.fusion = fusion == "pixel" ? FusionMode::kPixel : FusionMode::kDescriptor;
    std::string rows = o.pixel.row_coordinate == RowCoordinate::kAbsolute ? "absolute" : "normalized";
    take(d, "row_coordinate", rows, seen);
    if (rows != "absolute" && rows != "normalized") throw Error(ErrorKind::kConfiguration, "row_coordinate must be normalized or absolute");
    o.pixel.row_coordinate = rows == "absolute" ? RowCoordinate::kAbsolute : RowCoordinate::kNormalized;
    std::string variant = o.pixel.schmid_variant == SchmidVariant::kClassical ? "classical" : "as_printed";
    take(d, "schmid_variant", variant, seen);
    if (variant != "classical" && variant != "as_printed") throw Error(ErrorKind::kConfiguration, "schmid_variant must be as_printed or classical");
    o.pixel.schmid_variant = variant == "classical" ? SchmidVariant::kClassical : SchmidVariant::kAsPrinted;
    reject_unknown(d, seen, "descriptor.");
  }

  if (j.contains("metric")) {
    const json& m = j.at("metric");
    std::set<std::string> seen;
    std::string kind(to_string(c.metric));
    take(m, "kind", kind, seen);
    c.metric = parse_metric_kind(kind);
    auto& o = c.metric_options;
    take(m, "pca_dim", o.pca_dim, seen);
    take(m, "pca_cap", o.pca_cap, seen);
    take(m, "xqda_use_pca", o.xqda_use_pca, seen);
    take(m, "xqda_ridge", o.xqda_ridge, seen);
    take(m, "xqda_max_dim", o.xqda_max_dim, seen);
    take(m, "kissme_ridge", o.kissme_ridge, seen);
    take(m, "psd_clip", o.psd_clip, seen);
    take(m, "lfda_neighbors", o.lfda_neighbors, seen);
    take(m, "lfda_dim", o.lfda_dim, seen);
    take(m, "lfda_ridge", o.lfda_ridge, seen);
    take(m, "negative_ratio", o.negative_ratio, seen);
    reject_unknown(m, seen, "metric.");
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str(), std::move(base));
}

ConfigHash descriptor_config_hash(const PipelineConfig& config) {
  const std::string canonical = descriptor_json(config).dump();
  ConfigHash hash{};
  SHA256(reinterpret_cast<const unsigned char*>(canonical.data()), canonical.size(), hash.data());
  return hash;
}

std::string to_hex(const ConfigHash& hash) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::uint8_t b : hash) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

}  // namespace mlgd
