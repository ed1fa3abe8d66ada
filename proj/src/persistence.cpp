#include "mlgd/persistence.hpp"

#include "mlgd/error.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mlgd {
namespace {

constexpr char kMagic[4] = {'M', 'L', 'G', 'D'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path), tmp_(path.string() + ".tmp") {
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(ErrorKind::kIo, "cannot write " + tmp_.string());
  }

  void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }

  template <typename U>
  void uint(U v) {
    unsigned char buf[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, sizeof(U));
  }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

  void fixed_string(const std::string& s, std::size_t width, const char* what) {
    if (s.size() >= width) throw Error(ErrorKind::kContract, std::string(what) + " too long for the cache: " + s);
    std::string padded = s;
    padded.resize(width, '\0');
    bytes(padded.data(), width);
  }

  void vector(const Vector& v) {
    uint<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
    for (double x : v) f64(x);
  }
  void matrix(const Matrix& m) {
    uint<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
    uint<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) f64(m(r, c));
  }

  void commit() {
    out_.flush();
    if (!out_) throw Error(ErrorKind::kIo, "write failed for " + tmp_.string());
    out_.close();
    std::filesystem::rename(tmp_, path_);
  }

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  }

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw Error(ErrorKind::kFormat, path_.string() + ": truncated file");
  }

  template <typename U>
  U uint() {
    unsigned char buf[sizeof(U)];
    bytes(buf, sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

  std::string fixed_string(std::size_t width) {
    std::string s(width, '\0');
    bytes(s.data(), width);
    s.resize(std::strlen(s.c_str()));
    return s;
  }

  std::uint64_t count(std::uint64_t limit, const char* what) {
    const auto n = uint<std::uint64_t>();
    if (n > limit) throw Error(ErrorKind::kFormat, path_.string() + ": implausible " + what + " " + std::to_string(n));
    return n;
  }

  Vector vector() {
    const auto n = count(std::uint64_t{1} << 32, "vector length");
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = f64();
    return v;
  }
  Matrix matrix() {
    const auto rows = count(std::uint64_t{1} << 32, "row count");
    const auto cols = count(std::uint64_t{1} << 32, "column count");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = f64();
    return m;
  }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) throw Error(ErrorKind::kFormat, path_.string() + ": trailing bytes");
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

void write_header(Writer& w, FileType type, const ConfigHash& hash) {
  w.bytes(kMagic, 4);
  w.uint<std::uint32_t>(kFormatVersion);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(type));
  w.bytes(hash.data(), hash.size());
}

FileHeader parse_header(Reader& r) {
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorKind::kFormat, r.path().string() + ": bad magic");
  FileHeader h;
  h.version = r.uint<std::uint32_t>();
  if (h.version != kFormatVersion) {
    throw Error(ErrorKind::kFormat, r.path().string() + ": unsupported format version " + std::to_string(h.version));
  }
  const auto type = r.uint<std::uint32_t>();
  if (type != 1 && type != 2) throw Error(ErrorKind::kFormat, r.path().string() + ": unknown file type");
  h.type = static_cast<FileType>(type);
  r.bytes(h.config_hash.data(), h.config_hash.size());
  return h;
}

FileHeader expect_header(Reader& r, FileType type, const std::optional<ConfigHash>& expected) {
  const FileHeader h = parse_header(r);
  if (h.type != type) {
    throw Error(ErrorKind::kFormat, r.path().string() + (type == FileType::kModel ? ": not a model file" : ": not a descriptor cache"));
  }
  if (expected && *expected != h.config_hash) {
    throw Error(ErrorKind::kConfiguration, r.path().string() + ": config hash mismatch (file " + to_hex(h.config_hash) +
                                               ", current " + to_hex(*expected) + ")");
  }
  return h;
}

}  // namespace

void write_descriptor_cache(const std::filesystem::path& path, const DescriptorCache& cache) {
  Writer w(path);
  write_header(w, FileType::kDescriptorCache, cache.config_hash);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(cache.layout.size()));
  for (const auto& b : cache.layout) {
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(b.set));
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(b.region));
    w.uint<std::uint64_t>(static_cast<std::uint64_t>(b.offset));
    w.uint<std::uint64_t>(static_cast<std::uint64_t>(b.length));
  }
  w.uint<std::uint64_t>(static_cast<std::uint64_t>(cache.vector_length));
  w.uint<std::uint64_t>(cache.records.size());
  const unsigned char pad[3] = {0, 0, 0};
  for (const auto& rec : cache.records) {
    if (rec.values.size() != cache.vector_length) throw Error(ErrorKind::kContract, "cache record length mismatch");
    w.fixed_string(rec.image_id, kImageIdBytes, "image id");
    w.fixed_string(rec.person_id, kPersonIdBytes, "person id");
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(rec.camera));
    w.bytes(pad, 3);
    for (float v : rec.values) w.f32(v);
  }
  w.commit();
}

DescriptorCache read_descriptor_cache(const std::filesystem::path& path, const std::optional<ConfigHash>& expected_hash) {
  Reader r(path);
  DescriptorCache cache;
  cache.config_hash = expect_header(r, FileType::kDescriptorCache, expected_hash).config_hash;
  const auto blocks = r.uint<std::uint32_t>();
  if (blocks > 1'000'000) throw Error(ErrorKind::kFormat, path.string() + ": implausible block count");
  for (std::uint32_t i = 0; i < blocks; ++i) {
    DescriptorBlock b;
    const auto set = r.uint<std::uint8_t>();
    if (set > 3) throw Error(ErrorKind::kFormat, path.string() + ": unknown feature set tag");
    b.set = static_cast<FeatureSet>(set);
    b.region = static_cast<int>(r.uint<std::uint32_t>());
    b.offset = static_cast<Eigen::Index>(r.uint<std::uint64_t>());
    b.length = static_cast<Eigen::Index>(r.uint<std::uint64_t>());
    cache.layout.push_back(b);
  }
  cache.vector_length = static_cast<Eigen::Index>(r.count(std::uint64_t{1} << 32, "vector length"));
  const auto n = r.count(std::uint64_t{1} << 32, "record count");
  cache.records.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    CacheRecord rec;
    rec.image_id = r.fixed_string(kImageIdBytes);
    rec.person_id = r.fixed_string(kPersonIdBytes);
    const auto cam = r.uint<std::uint8_t>();
    if (cam > 1) throw Error(ErrorKind::kFormat, path.string() + ": bad camera tag");
    rec.camera = static_cast<Camera>(cam);
    unsigned char pad[3];
    r.bytes(pad, 3);
    rec.values.resize(cache.vector_length);
    for (auto& v : rec.values) v = r.f32();
    cache.records.push_back(std::move(rec));
  }
  r.expect_end();
  return cache;
}

void write_model(const std::filesystem::path& path, const MetricModel& model, const ConfigHash& config_hash) {
  Writer w(path);
  write_header(w, FileType::kModel, config_hash);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(model.kind));
  w.uint<std::uint64_t>(static_cast<std::uint64_t>(model.input_dim));
  w.uint<std::uint8_t>(model.pca ? 1 : 0);
  if (model.pca) {
    w.vector(model.pca->mean);
    w.matrix(model.pca->basis);
    w.vector(model.pca->eigenvalues);
  }
  w.matrix(model.projection);
  w.matrix(model.kernel);
  w.vector(model.train_mean);
  w.commit();
}

MetricModel read_model(const std::filesystem::path& path, const std::optional<ConfigHash>& expected_hash,
                       ConfigHash* stored_hash) {
  Reader r(path);
  const FileHeader h = expect_header(r, FileType::kModel, expected_hash);
  if (stored_hash) *stored_hash = h.config_hash;
  MetricModel model;
  const auto kind = r.uint<std::uint32_t>();
  if (kind > 3) throw Error(ErrorKind::kFormat, path.string() + ": unknown metric kind");
  model.kind = static_cast<MetricKind>(kind);
  model.input_dim = static_cast<Eigen::Index>(r.uint<std::uint64_t>());
  if (r.uint<std::uint8_t>() != 0) {
    PcaTransform pca;
    pca.mean = r.vector();
    pca.basis = r.matrix();
    pca.eigenvalues = r.vector();
    model.pca = std::move(pca);
  }
  model.projection = r.matrix();
  model.kernel = r.matrix();
  model.train_mean = r.vector();
  r.expect_end();
  return model;
}

FileHeader read_header(const std::filesystem::path& path) {
  Reader r(path);
  return parse_header(r);
}

std::string report_json(const EvalReport& report, bool include_timings) {
  using nlohmann::json;
  json trials = json::array();
  for (const auto& t : report.trials) {
    json jt{
        {"trial", t.trial_index},
        {"seed", t.seed},
        {"probe_camera", std::string(1, camera_letter(t.probe_camera))},
        {"train_identities", t.train_identities},
        {"probes", t.probes},
        {"gallery_size", t.gallery_size},
        {"cmc", t.cmc.rates},
    };
    if (include_timings) jt["timings"] = {{"fit_seconds", t.fit_seconds}, {"score_seconds", t.score_seconds}};
    trials.push_back(std::move(jt));
  }
  json summary = json::array();
  for (const auto& s : report.summary) summary.push_back({{"rank", s.rank}, {"mean", s.mean}, {"ci95", s.ci95}});
  json j{
      {"dataset", report.dataset},
      {"metric", report.metric},
      {"config_hash", report.config_hash},
      {"seed", report.seed},
      {"trials_averaged", report.mean_cmc.trials_averaged},
      {"summary", summary},
      {"mean_cmc", report.mean_cmc.rates},
      {"trials", trials},
  };
  if (include_timings) j["timings"] = {{"extract_seconds", report.extract_seconds}};
  return j.dump(2) + "\n";
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "rank,mean,ci95\n";
  const auto& rates = report.mean_cmc.rates;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    std::vector<double> values;
    for (const auto& t : report.trials) values.push_back(t.cmc.rates[k]);
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    out << (k + 1) << ',' << rates[k] << ',' << 1.96 * sd / std::sqrt(static_cast<double>(values.size())) << '\n';
  }
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorKind::kIo, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace mlgd
