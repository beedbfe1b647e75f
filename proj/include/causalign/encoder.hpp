#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "causalign/image.hpp"
#include "causalign/matrix.hpp"
#include "causalign/random.hpp"

namespace causalign {

// Input frames are average-pooled over `patch` x `patch` blocks, passed
// through a tanh hidden layer per frame, mean-pooled over time and projected
// to `embed_dim`.
struct EncoderArch {
  int height = 32;
  int width = 32;
  int channels = 3;
  int patch = 4;
  int hidden = 64;
  int embed_dim = 32;
  std::string activation = "tanh";

  int feature_count() const { return (height / patch) * (width / patch) * channels; }
  void validate() const;
  bool operator==(const EncoderArch&) const = default;
};

/// Every learnable value of the vision encoder, the class-prompt table and
/// the temperature, grouped in checkpoint order.
struct Parameters {
  std::vector<double> proj_weight;  // hidden x features
  std::vector<double> proj_bias;    // hidden
  std::vector<double> head_weight;  // embed_dim x hidden
  std::vector<double> head_bias;    // embed_dim
  std::vector<double> text_table;   // classes x embed_dim
  std::vector<double> log_scale;    // single value, log(1 / tau)

  static constexpr std::size_t kGroupCount = 6;
  static const char* group_name(std::size_t group);
  /// Weight decay applies to matrices only.
  static bool group_decays(std::size_t group);

  std::vector<double>& group(std::size_t index);
  const std::vector<double>& group(std::size_t index) const;

  /// Zero-filled copy with identical group sizes.
  Parameters zeros_like() const;
  std::size_t total_size() const;
  void add_scaled(const Parameters& other, double scale);

  bool operator==(const Parameters&) const = default;
};

// 1/tau starts at 1/0.07 and is capped at 100.
inline constexpr double kInitialTemperature = 0.07;
inline constexpr double kMaxInverseTemperature = 100.0;

class ClipModel {
 public:
  ClipModel() = default;
  ClipModel(EncoderArch arch, int num_classes, Parameters params);
  static ClipModel initialize(const EncoderArch& arch, int num_classes, Rng& rng);

  const EncoderArch& arch() const { return arch_; }
  int num_classes() const { return num_classes_; }
  const Parameters& params() const { return params_; }
  Parameters& params() { return params_; }

  double inverse_temperature() const;
  double temperature() const { return 1.0 / inverse_temperature(); }
  /// d(1/tau) / d(log_scale); zero while the cap is active.
  double inverse_temperature_slope() const;

  /// Raw (unnormalized) class prompt embeddings, one row per class.
  Matrix text_embeddings() const;

 private:
  EncoderArch arch_;
  int num_classes_ = 0;
  Parameters params_;
};

/// Cached activations of one clip forward pass, needed for backprop.
struct ClipActivations {
  std::vector<std::vector<double>> features;  // per frame
  std::vector<std::vector<double>> hidden;    // per frame, post-activation
  std::vector<double> pooled;
  std::vector<double> output;  // raw projection, before normalization
};

/// Patch-average pooled features of one frame, centered at 0.5.
std::vector<double> frame_features(const EncoderArch& arch, const ImageTensor& frame);

ClipActivations forward_clip(const ClipModel& model, const Clip& frames);

/// Unit-norm clip embedding.
std::vector<double> encode_clip(const ClipModel& model, const Clip& frames);

/// Accumulates d loss / d encoder params into `grads`, given d loss / d output.
void backward_clip(const ClipModel& model, const ClipActivations& acts, std::span<const double> grad_output,
                   Parameters& grads);

}  // namespace causalign
