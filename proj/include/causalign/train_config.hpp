#pragma once

#include <cstdint>

#include "causalign/losses.hpp"
#include "causalign/optimizer.hpp"

namespace causalign {

struct TrainConfig {
  double alpha = 0.5;
  double lambda_aug = 0.8;
  double lambda_sup = 0.4;
  // The reference setting is 1e-5 for a pretrained backbone; training from
  // scratch at this scale needs a larger step.
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  int batch_size = 32;
  int epochs = 60;
  std::uint64_t seed = 0;
  int frames_per_clip = 4;
  // Horizontal flip + brightness jitter applied before the Fourier mix.
  bool standard_augment = true;
  double brightness_jitter = 0.05;

  LossWeights weights() const { return {lambda_aug, lambda_sup}; }
  AdamWOptions optimizer() const;
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

}  // namespace causalign
