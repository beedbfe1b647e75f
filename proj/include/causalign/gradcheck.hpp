#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "causalign/encoder.hpp"
#include "causalign/trainer.hpp"

namespace causalign {

/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-2): relative error
/// with an effective 1e-6 absolute floor at the 1e-4 tolerance.
double gradient_error(double analytic, double numeric);

struct ComponentCheck {
  std::string component;  // l_orig, l_aug, l_sup, l_total
  double max_error = 0.0;
  std::string worst_group;
  std::size_t checked = 0;
  bool passed = false;
};

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Test hook: adds this to one analytic gradient entry to prove the check bites.
  double corrupt = 0.0;
};

/// A small random instance: model, views and weights.
struct GradcheckInstance {
  ClipModel model;
  BatchViews views;
  LossWeights weights;
};

/// 2..4 clips of 8x8 frames, 2..3 classes, embed_dim <= 8.
GradcheckInstance random_gradcheck_instance(Rng& rng);

/// Central differences over every parameter of every group, each component.
std::vector<ComponentCheck> check_gradients(const GradcheckInstance& instance, const GradcheckOptions& options);

}  // namespace causalign
