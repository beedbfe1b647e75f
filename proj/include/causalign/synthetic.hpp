#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "causalign/image.hpp"
#include "causalign/manifest.hpp"
#include "causalign/dataset.hpp"

namespace causalign {

// Domain appearance. Only amplitude statistics live here; shape geometry is
// shared across domains.
struct StyleParams {
  double brightness_bias = 0.0;   // global lighting offset, foreground included
  double haze = 0.0;              // extra additive glow on the background
  double noise = 0.02;            // half-width of zero-mean uniform pixel noise
  double tint_strength = 0.12;    // per-class background colour cast
  double texture_amplitude = 0.06;  // per-class background grating
  int palette_shift = 0;          // class k is drawn with background palette (k + shift) mod C

  /// `path` prefixes error messages, e.g. "data.target_style".
  void validate(const std::string& path) const;
  bool operator==(const StyleParams&) const = default;
};

struct SynthSpec {
  int num_classes = 3;
  int clips_per_class = 10;
  int frames_per_clip = 4;
  int image_size = 32;
  StyleParams source_style = {};
  StyleParams target_style = {0.12, 0.05, 0.04, 0.12, 0.06, 1};
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const SynthSpec&) const = default;
};

/// Default class names: the three surgical task abbreviations, then class<k>.
std::vector<std::string> default_class_names(int num_classes);

struct SynthClip {
  std::string clip_id;
  std::string base_id;  // shared by the source and target rendition
  int label = 0;
  Domain domain = Domain::kSource;
  Clip frames;                                // quantized to 8 bits
  std::vector<std::vector<unsigned char>> masks;  // per frame, 1 = foreground
};

struct SynthCorpus {
  std::vector<std::string> class_names;
  std::vector<SynthClip> clips;  // per class, per clip index: source then target

  ClipDataset dataset(DomainFilter filter) const;
};

/// Renders the corpus in memory. Class = shape family + motion direction;
/// domain = background palette, texture, brightness, haze, noise.
SynthCorpus render_synthetic(const SynthSpec& spec);

/// Renders and writes PNG frames plus `manifest.tsv` under `output_dir`.
Manifest generate_synthetic(const SynthSpec& spec, const std::filesystem::path& output_dir);

}  // namespace causalign
