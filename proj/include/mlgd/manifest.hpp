#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mlgd {

enum class Camera : unsigned char { kA = 0, kB = 1 };

char camera_letter(Camera c);
Camera parse_camera(std::string_view value);

struct ManifestEntry {
  std::string image_path;        // as written in the manifest; used as the image id
  std::filesystem::path resolved;  // absolute or relative to the working directory
  std::string person_id;
  Camera camera = Camera::kA;
};

struct DatasetManifest {
  std::string name;
  std::vector<ManifestEntry> entries;

  /// Distinct person ids in first-appearance order.
  std::vector<std::string> identities() const;
};

/// Reads a CSV manifest with header `image_path,person_id,camera_id`.
/// Relative image paths are resolved against the manifest's directory.
/// A directory holding cam_a/ and cam_b/ is read with the VIPeR adapter.
DatasetManifest parse_manifest(const std::filesystem::path& path);

/// Builds a manifest from the VIPeR layout: cam_a/<id>_<angle>.bmp and
/// cam_b/<id>_<angle>.bmp, the person id being the file stem up to the first '_'.
DatasetManifest scan_viper_layout(const std::filesystem::path& root);

/// Writes the CSV form read by parse_manifest.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

}  // namespace mlgd
