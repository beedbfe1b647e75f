#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "causalign/batching.hpp"
#include "causalign/checkpoint.hpp"
#include "causalign/dataset.hpp"
#include "causalign/encoder.hpp"
#include "causalign/losses.hpp"
#include "causalign/optimizer.hpp"
#include "causalign/train_config.hpp"

namespace causalign {

/// Frame indices for sparse uniform sampling of `count` frames from a clip of
/// `total` frames: one frame per equal segment, at `offset` within each segment
/// (offsets wrap when a segment is shorter).
std::vector<std::size_t> sample_frame_indices(std::size_t total, std::size_t count, std::size_t offset);
Clip sample_frames(const Clip& clip, std::size_t count, std::size_t offset);

/// Original and Fourier-augmented views of one batch, plus the betas used.
struct BatchViews {
  std::vector<Clip> original;
  std::vector<Clip> augmented;
  std::vector<int> labels;
  std::vector<double> betas;
};

struct ViewOptions {
  double alpha = 0.5;
  int frames_per_clip = 4;
  bool standard_augment = false;
  double brightness_jitter = 0.0;
  bool random_offsets = false;
  // Worker threads for view construction. Items draw from their own streams,
  // so the result does not depend on this.
  int threads = 1;
};

/// Samples frames, applies the standard augmentations, and builds each item's
/// augmented view against its style partner. Each item draws from its own
/// stream split from `rng` by batch position.
BatchViews prepare_views(const ClipDataset& data, const Batch& batch, const ViewOptions& options, Rng& rng);

/// Per-component coefficients on the gradient. The bundle always reports
/// all three component losses.
struct ComponentWeights {
  double orig = 1.0;
  double aug = 0.0;
  double sup = 0.0;
};

struct StepResult {
  LossBundle losses;
  Parameters grads;
};

/// Loss bundle plus exact gradients of orig*L_orig + aug*L_aug + sup*L_sup.
/// `weights` only sets the reported l_total.
StepResult evaluate_views(const ClipModel& model, const BatchViews& views, const LossWeights& weights,
                          const ComponentWeights& gradient_weights);

/// One training objective evaluation: views from `rng`, gradient of L_total.
StepResult forward_backward(const ClipModel& model, const ClipDataset& data, const Batch& batch,
                            const LossWeights& weights, const ViewOptions& options, Rng& rng);

struct EpochLog {
  int epoch = 0;
  LossBundle mean;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

/// Freshly initialized checkpoint for `data`; what `train` starts from.
Checkpoint initial_checkpoint(const TrainConfig& config, const EncoderArch& arch, const ClipDataset& data);

/// Shuffled mini-batch AdamW on L_total. Single-threaded and deterministic in
/// `config.seed`.
/// `on_epoch`, when set, sees each epoch's log entry as soon as it is complete.
TrainResult train(const TrainConfig& config, const EncoderArch& arch, const ClipDataset& data,
                  const std::function<void(const EpochLog&)>& on_epoch = {}, int threads = 1);

/// Class probabilities for a clip. Clips longer than frames_per_clip are
/// split into interleaved sequences whose logits are averaged before the softmax.
std::vector<double> predict(const Checkpoint& checkpoint, const Clip& frames);

/// Softmax over the mean of per-sequence class similarities.
std::vector<double> predict_sequences(const ClipModel& model, const std::vector<Clip>& sequences);

/// Scaled cosine similarities between one clip and every class prompt.
std::vector<double> class_logits(const ClipModel& model, const Clip& frames);

}  // namespace causalign
