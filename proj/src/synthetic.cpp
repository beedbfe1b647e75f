#include "causalign/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "causalign/error.hpp"
#include "causalign/png_io.hpp"
#include "causalign/random.hpp"

namespace causalign {

namespace {

constexpr double kBackgroundLevel = 0.35;
constexpr double kForegroundLevel = 0.8;

}  // namespace

void StyleParams::validate(const std::string& w) const {
  const StyleParams& s = *this;
  require(std::isfinite(s.brightness_bias) && std::abs(s.brightness_bias) <= 0.5, w + ".brightness_bias must lie in [-0.5, 0.5]");
  require(std::isfinite(s.haze) && s.haze >= 0.0 && s.haze <= 0.5, w + ".haze must lie in [0, 0.5]");
  require(std::isfinite(s.noise) && s.noise >= 0.0 && s.noise <= 0.5, w + ".noise must lie in [0, 0.5]");
  require(std::isfinite(s.tint_strength) && s.tint_strength >= 0.0 && s.tint_strength <= 0.5,
          w + ".tint_strength must lie in [0, 0.5]");
  require(std::isfinite(s.texture_amplitude) && s.texture_amplitude >= 0.0 && s.texture_amplitude <= 0.5,
          w + ".texture_amplitude must lie in [0, 0.5]");
  require(s.palette_shift >= 0, w + ".palette_shift must be non-negative");
}

namespace {

// Clip geometry, shared by both renditions of a clip.
struct Geometry {
  double cx = 0.0, cy = 0.0;
  double scale = 1.0;
  double vx = 0.0, vy = 0.0;
};

bool inside_shape(int family, double dx, double dy, double size, double scale) {
  const double s = size * scale;
  switch (family % 6) {
    case 0: return std::abs(dx) <= 0.35 * s && std::abs(dy) <= 0.07 * s;
    case 1: return std::abs(dy) <= 0.35 * s && std::abs(dx) <= 0.07 * s;
    case 2:
      return (std::abs(dx) <= 0.25 * s && std::abs(dy) <= 0.06 * s) ||
             (std::abs(dy) <= 0.25 * s && std::abs(dx) <= 0.06 * s);
    case 3: {
      const double r = std::hypot(dx, dy);
      return r >= 0.14 * s && r <= 0.24 * s;
    }
    case 4: return std::abs(dx) <= 0.15 * s && std::abs(dy) <= 0.15 * s;
    default: {
      const double u = (dx + dy) / std::numbers::sqrt2;
      const double v = (dx - dy) / std::numbers::sqrt2;
      return std::abs(u) <= 0.07 * s && std::abs(v) <= 0.3 * s;
    }
  }
}

struct Grating {
  int fx, fy;
};

Grating grating_for(int palette) {
  static constexpr Grating kGratings[] = {{3, 0}, {0, 3}, {2, 2}, {4, 1}, {1, 4}, {3, 3}};
  return kGratings[palette % 6];
}

double tint_for(int palette, int num_classes, int channel, double strength) {
  // Three equally spaced cosines sum to zero, so tints never change grayscale brightness.
  const double angle = 2.0 * std::numbers::pi * (channel / 3.0 - static_cast<double>(palette) / num_classes);
  return strength * std::cos(angle);
}

std::vector<unsigned char> shape_mask(const SynthSpec& spec, int label, const Geometry& g, int frame) {
  const int n = spec.image_size;
  const double t = frame - 0.5 * (spec.frames_per_clip - 1);
  const double cx = g.cx + g.vx * t;
  const double cy = g.cy + g.vy * t;
  std::vector<unsigned char> mask(static_cast<std::size_t>(n) * n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      mask[static_cast<std::size_t>(y) * n + x] = inside_shape(label, x + 0.5 - cx, y + 0.5 - cy, n, g.scale) ? 1 : 0;
  return mask;
}

ImageTensor render_frame(const SynthSpec& spec, const StyleParams& style, int label,
                         const std::vector<unsigned char>& mask, double texture_phase, Rng& rng) {
  const int n = spec.image_size;
  const int palette = (label + style.palette_shift) % spec.num_classes;
  const Grating grating = grating_for(palette);

  // Zero-mean noise per channel, so noise level never shifts mean brightness.
  std::vector<double> noise(static_cast<std::size_t>(n) * n * 3);
  for (double& v : noise) v = rng.uniform(-style.noise, style.noise);
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (std::size_t k = 0; k < noise.size() / 3; ++k) mean += noise[k * 3 + c];
    mean /= static_cast<double>(noise.size() / 3);
    for (std::size_t k = 0; k < noise.size() / 3; ++k) noise[k * 3 + c] -= mean;
  }

  ImageTensor img(n, n, 3);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const std::size_t k = static_cast<std::size_t>(y) * n + x;
      const double wave =
          style.texture_amplitude *
          std::sin(2.0 * std::numbers::pi * (grating.fx * x + grating.fy * y) / n + texture_phase);
      for (int c = 0; c < 3; ++c) {
        double v = style.brightness_bias + noise[k * 3 + c];
        if (mask[k])
          v += kForegroundLevel;
        else
          v += kBackgroundLevel + style.haze + tint_for(palette, spec.num_classes, c, style.tint_strength) + wave;
        img.at(y, x, c) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return quantize_8bit(img);
}

std::string clip_base_id(const std::vector<std::string>& names, int label, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%03d", index);
  return names[label] + "_" + buf;
}

}  // namespace

void SynthSpec::validate() const {
  require(num_classes >= 1, "data.num_classes must be positive");
  require(clips_per_class >= 1, "data.clips_per_class must be positive");
  require(frames_per_clip >= 1, "data.frames_per_clip must be positive");
  require(image_size >= 4, "data.image_size must be at least 4");
  source_style.validate("data.source_style");
  target_style.validate("data.target_style");
}

std::vector<std::string> default_class_names(int num_classes) {
  static const char* kTasks[] = {"DS", "KT", "ND"};
  std::vector<std::string> names;
  for (int k = 0; k < num_classes; ++k) names.push_back(k < 3 ? std::string(kTasks[k]) : "class" + std::to_string(k));
  return names;
}

ClipDataset SynthCorpus::dataset(DomainFilter filter) const {
  ClipDataset d;
  d.class_names = class_names;
  for (const auto& c : clips) {
    if (!matches(filter, c.domain)) continue;
    d.ids.push_back(c.clip_id);
    d.labels.push_back(c.label);
    d.clips.push_back(c.frames);
  }
  return d;
}

SynthCorpus render_synthetic(const SynthSpec& spec) {
  spec.validate();
  SynthCorpus corpus;
  corpus.class_names = default_class_names(spec.num_classes);
  const Rng root(spec.seed);
  const double n = spec.image_size;

  for (int label = 0; label < spec.num_classes; ++label) {
    for (int j = 0; j < spec.clips_per_class; ++j) {
      Rng clip_rng = root.split(static_cast<std::uint64_t>(label) * spec.clips_per_class + j);
      Geometry g;
      g.cx = n / 2 + clip_rng.uniform(-n / 8, n / 8);
      g.cy = n / 2 + clip_rng.uniform(-n / 8, n / 8);
      g.scale = clip_rng.uniform(0.85, 1.15);
      const double heading = 2.0 * std::numbers::pi * label / spec.num_classes + clip_rng.uniform(-0.3, 0.3);
      const double speed = n / 16 * clip_rng.uniform(0.8, 1.2);
      g.vx = speed * std::cos(heading);
      g.vy = speed * std::sin(heading);

      std::vector<std::vector<unsigned char>> masks;
      for (int f = 0; f < spec.frames_per_clip; ++f) masks.push_back(shape_mask(spec, label, g, f));

      const std::string base = clip_base_id(corpus.class_names, label, j);
      for (Domain domain : {Domain::kSource, Domain::kTarget}) {
        const StyleParams& style = domain == Domain::kSource ? spec.source_style : spec.target_style;
        Rng render_rng = clip_rng.split(domain == Domain::kSource ? 1 : 2);
        const double texture_phase = render_rng.uniform(0.0, 2.0 * std::numbers::pi);
        SynthClip clip;
        clip.base_id = base;
        clip.clip_id = base + (domain == Domain::kSource ? "_src" : "_tgt");
        clip.label = label;
        clip.domain = domain;
        clip.masks = masks;
        for (int f = 0; f < spec.frames_per_clip; ++f)
          clip.frames.push_back(render_frame(spec, style, label, masks[f], texture_phase, render_rng));
        corpus.clips.push_back(std::move(clip));
      }
    }
  }
  return corpus;
}

Manifest generate_synthetic(const SynthSpec& spec, const std::filesystem::path& output_dir) {
  const SynthCorpus corpus = render_synthetic(spec);
  Manifest m;
  m.class_names = corpus.class_names;
  m.base_dir = output_dir;
  try {
    std::filesystem::create_directories(output_dir / "frames");
    for (const auto& clip : corpus.clips) {
      const std::filesystem::path rel = std::filesystem::path("frames") / clip.clip_id;
      std::filesystem::create_directories(output_dir / rel);
      ManifestEntry e;
      e.clip_id = clip.clip_id;
      e.label = clip.label;
      e.domain = clip.domain;
      for (std::size_t f = 0; f < clip.frames.size(); ++f) {
        const auto frame_rel = rel / ("f" + std::to_string(f) + ".png");
        write_png(clip.frames[f], output_dir / frame_rel);
        e.frames.push_back(frame_rel.generic_string());
      }
      m.entries.push_back(std::move(e));
    }
  } catch (const std::filesystem::filesystem_error& err) {
    throw IoError(std::string("cannot write synthetic corpus: ") + err.what());
  }
  write_manifest(m, output_dir / "manifest.tsv");
  return m;
}

}  // namespace causalign
