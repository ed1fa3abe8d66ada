#include "mlgd/manifest.hpp"

#include "mlgd/error.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace mlgd {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

char camera_letter(Camera c) { return c == Camera::kA ? 'A' : 'B'; }

Camera parse_camera(std::string_view value) {
  if (value == "A" || value == "a") return Camera::kA;
  if (value == "B" || value == "b") return Camera::kB;
  throw Error(ErrorKind::kFormat, "unknown camera '" + std::string(value) + "' (expected A or B)");
}

std::vector<std::string> DatasetManifest::identities() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : entries)
    if (seen.insert(e.person_id).second) out.push_back(e.person_id);
  return out;
}

DatasetManifest parse_manifest(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return scan_viper_layout(path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open manifest " + path.string());

  DatasetManifest manifest;
  manifest.name = path.stem().string();
  const auto base = path.parent_path();
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    if (!header_seen) {
      if (fields.size() != 3 || lower(fields[0]) != "image_path" || lower(fields[1]) != "person_id" ||
          lower(fields[2]) != "camera_id") {
        throw Error(ErrorKind::kFormat, where + "expected header image_path,person_id,camera_id");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw Error(ErrorKind::kFormat, where + "malformed row (expected 3 non-empty fields)");
    }
    ManifestEntry e;
    e.image_path = fields[0];
    const std::filesystem::path p(fields[0]);
    e.resolved = p.is_absolute() ? p : base / p;
    e.person_id = fields[1];
    try {
      e.camera = parse_camera(fields[2]);
    } catch (const Error& err) {
      throw Error(ErrorKind::kFormat, where + err.what());
    }
    manifest.entries.push_back(std::move(e));
  }
  if (!header_seen) throw Error(ErrorKind::kFormat, path.string() + ": empty manifest");
  return manifest;
}

DatasetManifest scan_viper_layout(const std::filesystem::path& root) {
  DatasetManifest manifest;
  manifest.name = root.filename().string();
  for (const auto& [dir, camera] : {std::pair{"cam_a", Camera::kA}, std::pair{"cam_b", Camera::kB}}) {
    const auto folder = root / dir;
    if (!std::filesystem::is_directory(folder)) {
      throw Error(ErrorKind::kIo, "VIPeR layout is missing " + folder.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& item : std::filesystem::directory_iterator(folder)) {
      if (item.is_regular_file() && lower(item.path().extension().string()) == ".bmp") files.push_back(item.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const auto stem = f.stem().string();
      ManifestEntry e;
      e.image_path = (std::filesystem::path(dir) / f.filename()).generic_string();
      e.resolved = f;
      e.person_id = stem.substr(0, stem.find('_'));
      e.camera = camera;
      manifest.entries.push_back(std::move(e));
    }
  }
  if (manifest.entries.empty()) throw Error(ErrorKind::kFormat, "no images found under " + root.string());
  return manifest;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << "image_path,person_id,camera_id\n";
  for (const auto& e : manifest.entries) out << e.image_path << ',' << e.person_id << ',' << camera_letter(e.camera) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace mlgd
