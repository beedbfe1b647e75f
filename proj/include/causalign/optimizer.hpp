#pragma once

#include <cstdint>

#include "causalign/encoder.hpp"

namespace causalign {

struct AdamWOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

// Adaptive-moment update with decoupled weight decay. Decay is applied to
// groups for which Parameters::group_decays() is true.
struct AdamWState {
  Parameters first_moment;
  Parameters second_moment;
  std::int64_t step = 0;

  static AdamWState zeros_like(const Parameters& params);
  bool operator==(const AdamWState&) const = default;
};

void adamw_step(Parameters& params, const Parameters& grads, AdamWState& state, const AdamWOptions& options);

}  // namespace causalign
