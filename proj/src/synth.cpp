#include "mlgd/synth.hpp"

#include "mlgd/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <vector>

namespace mlgd {
namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double normal() {
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = seed ^ (a * 0x9E3779B97F4A7C15ULL) ^ (b * 0xC2B2AE3D27D4EB4FULL);
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  return x;
}

enum class Texture { kFlat, kHorizontalStripes, kVerticalStripes, kChecker };

struct Band {
  int row_end = 0;
  std::array<double, 3> color{};
  std::array<double, 3> accent{};
  Texture texture = Texture::kFlat;
  int period = 4;
};

struct Appearance {
  std::vector<Band> bands;
};

std::vector<std::array<double, 3>> make_palette(const SynthOptions& options) {
  Rng rng(stream_seed(options.seed, 0xFFFFFFFFULL, 3));
  std::vector<std::array<double, 3>> palette(static_cast<std::size_t>(options.palette_size));
  for (auto& color : palette)
    for (auto& c : color) c = rng.uniform(0.1, 0.9);
  return palette;
}

// Band boundaries snap to a coarse grid so that garments line up across
// identities the way torso and legs do in real pedestrian crops.
constexpr std::array<int, 5> kBoundaryRows{24, 44, 64, 84, 104};

Appearance make_appearance(int identity, const SynthOptions& options) {
  Rng rng(stream_seed(options.seed, static_cast<std::uint64_t>(identity), 0));
  const auto palette = make_palette(options);
  const auto pick_color = [&] {
    std::array<double, 3> color{};
    if (palette.empty()) {
      for (auto& c : color) c = rng.uniform(0.1, 0.9);
    } else {
      color = palette[static_cast<std::size_t>(rng.integer(0, options.palette_size - 1))];
    }
    return color;
  };

  std::vector<int> cuts(kBoundaryRows.begin(), kBoundaryRows.end());
  const int count = rng.integer(3, 5);
  while (static_cast<int>(cuts.size()) > count - 1) {
    cuts.erase(cuts.begin() + rng.integer(0, static_cast<int>(cuts.size()) - 1));
  }
  cuts.push_back(kStandardHeight);

  Appearance a;
  for (int end : cuts) {
    Band b;
    b.row_end = end;
    b.color = pick_color();
    b.accent = pick_color();
    b.texture = rng.uniform() < options.textured_fraction ? static_cast<Texture>(rng.integer(1, 3)) : Texture::kFlat;
    b.period = options.texture_period;
    a.bands.push_back(b);
  }
  return a;
}

// Rotation by `radians` about the gray axis (1,1,1)/sqrt(3).
std::array<std::array<double, 3>, 3> hue_rotation(double radians) {
  const double c = std::cos(radians), s = std::sin(radians);
  const double t = (1.0 - c) / 3.0, k = s / std::sqrt(3.0);
  return {{{c + t, t - k, t + k}, {t + k, c + t, t - k}, {t - k, t + k, c + t}}};
}

}  // namespace

RgbImage render_synthetic_view(int identity, Camera camera, const SynthOptions& options) {
  Appearance look = make_appearance(identity, options);
  Rng rng(stream_seed(options.seed, static_cast<std::uint64_t>(identity), camera == Camera::kA ? 1 : 2));
  for (std::size_t i = 0; i + 1 < look.bands.size(); ++i) {
    look.bands[i].row_end += rng.integer(-options.max_boundary_jitter, options.max_boundary_jitter);
  }
  const int dx = rng.integer(-options.max_shift_x, options.max_shift_x);
  const int dy = rng.integer(-options.max_shift_y, options.max_shift_y);
  const double jitter = rng.uniform(1.0 - options.illumination_jitter, 1.0 + options.illumination_jitter);

  Band background;
  for (auto& c : background.color) c = rng.uniform(0.0, 1.0);
  for (auto& c : background.accent) c = rng.uniform(0.0, 1.0);
  background.texture = Texture::kFlat;

  double gain = jitter;
  double offset = 0.0;
  std::array<double, 3> cast{1.0, 1.0, 1.0};
  auto rotation = hue_rotation(0.0);
  if (camera == Camera::kB) {
    gain *= options.camera_b_gain;
    offset = options.camera_b_offset;
    cast = options.camera_b_cast;
    const double degrees = rng.uniform(-options.max_hue_degrees, options.max_hue_degrees);
    rotation = hue_rotation(degrees * std::numbers::pi / 180.0);
  }

  RgbImage img(kStandardWidth, kStandardHeight);
  for (int y = 0; y < kStandardHeight; ++y) {
    const int sy = std::clamp(y - dy, 0, kStandardHeight - 1);
    const Band* body = &look.bands.back();
    for (const auto& b : look.bands) {
      if (sy < b.row_end) {
        body = &b;
        break;
      }
    }
    for (int x = 0; x < kStandardWidth; ++x) {
      const int sx = x - dx;
      const bool outside = x < options.background_margin || x >= kStandardWidth - options.background_margin;
      const Band* band = outside ? &background : body;
      bool accent = false;
      switch (band->texture) {
        case Texture::kFlat: break;
        case Texture::kHorizontalStripes: accent = (sy / band->period) % 2 == 1; break;
        case Texture::kVerticalStripes: accent = ((sx + 64) / band->period) % 2 == 1; break;
        case Texture::kChecker: accent = ((sy / band->period) + ((sx + 64) / band->period)) % 2 == 1; break;
      }
      const auto& base = accent ? band->accent : band->color;
      std::array<double, 3> rgb{};
      for (int r = 0; r < 3; ++r) {
        double v = 0.0;
        for (int c = 0; c < 3; ++c) v += rotation[r][c] * base[c];
        rgb[r] = v;
      }
      for (int c = 0; c < 3; ++c) {
        const double v = gain * cast[c] * rgb[c] + offset + options.noise_sigma * rng.normal();
        img.at(x, y, c) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return img;
}

DatasetManifest generate_synthetic_dataset(const std::filesystem::path& out_dir, const SynthOptions& options) {
  if (options.identities < 1) throw Error(ErrorKind::kConfiguration, "identity count must be positive");
  std::filesystem::create_directories(out_dir / "cam_a");
  std::filesystem::create_directories(out_dir / "cam_b");
  DatasetManifest manifest;
  manifest.name = "synthetic";
  for (int id = 0; id < options.identities; ++id) {
    char name[32];
    std::snprintf(name, sizeof(name), "%04d.png", id);
    for (Camera cam : {Camera::kA, Camera::kB}) {
      const std::string rel = std::string(cam == Camera::kA ? "cam_a/" : "cam_b/") + name;
      save_png(out_dir / rel, render_synthetic_view(id, cam, options));
      ManifestEntry e;
      e.image_path = rel;
      e.resolved = out_dir / rel;
      char pid[16];
      std::snprintf(pid, sizeof(pid), "%04d", id);
      e.person_id = pid;
      e.camera = cam;
      manifest.entries.push_back(std::move(e));
    }
  }
  return manifest;
}

}  // namespace mlgd
