#pragma once

// Synthetic two-camera pedestrian-like dataset for desk-scale testing. Each
// identity is a stack of 3-5 horizontal bands with its own colors and
// textures. Camera B sees every image through a global affine illumination
// change, a per-image hue rotation and additive noise.

#include "mlgd/image.hpp"
#include "mlgd/manifest.hpp"

#include <array>
#include <cstdint>
#include <filesystem>

namespace mlgd {

struct SynthOptions {
  int identities = 50;
  std::uint64_t seed = 0;
  double noise_sigma = 0.02;
  double max_hue_degrees = 10.0;
  /// Camera B illumination: out = gain * in + offset, per channel cast applied on top.
  double camera_b_gain = 0.55;
  double camera_b_offset = 0.15;
  std::array<double, 3> camera_b_cast{1.0, 0.85, 1.2};
  /// Per-image multiplicative illumination jitter, uniform in [1 - j, 1 + j].
  double illumination_jitter = 0.35;
  int max_shift_x = 1;
  int max_shift_y = 1;
  /// Band colors are drawn from a palette shared by all identities; 0 draws them freely.
  int palette_size = 4;
  /// Probability that a band carries stripes or a checker instead of a flat color.
  double textured_fraction = 0.5;
  int texture_period = 4;
  /// Each view moves every band boundary by up to this many rows.
  int max_boundary_jitter = 0;
  /// Columns on each side filled with a per-view random background color.
  int background_margin = 4;
};

/// Renders one view of one identity without touching the filesystem.
RgbImage render_synthetic_view(int identity, Camera camera, const SynthOptions& options);

/// Writes cam_a/NNNN.png and cam_b/NNNN.png under out_dir and returns the
/// manifest (image paths relative to the manifest's directory when the
/// manifest is written next to the images' parent).
DatasetManifest generate_synthetic_dataset(const std::filesystem::path& out_dir, const SynthOptions& options);

}  // namespace mlgd
