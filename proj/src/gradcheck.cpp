#include "causalign/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace causalign {

double gradient_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-2});
}

GradcheckInstance random_gradcheck_instance(Rng& rng) {
  EncoderArch arch;
  arch.height = 8;
  arch.width = 8;
  arch.channels = 3;
  arch.patch = 4;
  arch.hidden = 3 + static_cast<int>(rng.below(4));
  arch.embed_dim = 4 + static_cast<int>(rng.below(5));
  const int classes = 2 + static_cast<int>(rng.below(2));
  const std::size_t clips = 2 + rng.below(3);
  const std::size_t frames = 1 + rng.below(3);

  GradcheckInstance inst;
  inst.model = ClipModel::initialize(arch, classes, rng);
  auto& p = inst.model.params();
  for (double& b : p.proj_bias) b = 0.3 * rng.normal();
  for (double& b : p.head_bias) b = 0.3 * rng.normal();
  p.log_scale[0] = std::log(rng.uniform(2.0, 20.0));

  auto random_clip = [&] {
    Clip clip;
    for (std::size_t f = 0; f < frames; ++f) {
      ImageTensor img(arch.height, arch.width, arch.channels);
      for (double& v : img.data()) v = rng.uniform();
      clip.push_back(std::move(img));
    }
    return clip;
  };
  for (std::size_t i = 0; i < clips; ++i) {
    inst.views.original.push_back(random_clip());
    inst.views.augmented.push_back(random_clip());
    inst.views.labels.push_back(static_cast<int>(rng.below(classes)));
    inst.views.betas.push_back(0.0);
  }
  inst.weights = {rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
  return inst;
}

std::vector<ComponentCheck> check_gradients(const GradcheckInstance& instance, const GradcheckOptions& options) {
  struct Component {
    const char* name;
    ComponentWeights weights;
  };
  const Component components[] = {
      {"l_orig", {1.0, 0.0, 0.0}},
      {"l_aug", {0.0, 1.0, 0.0}},
      {"l_sup", {0.0, 0.0, 1.0}},
      {"l_total", {1.0, instance.weights.lambda_aug, instance.weights.lambda_sup}},
  };

  std::vector<ComponentCheck> out;
  for (const auto& comp : components) {
    auto objective = [&](const ClipModel& m) {
      const auto r = evaluate_views(m, instance.views, instance.weights, comp.weights);
      return comp.weights.orig * r.losses.l_orig + comp.weights.aug * r.losses.l_aug +
             comp.weights.sup * r.losses.l_sup;
    };
    Parameters analytic = evaluate_views(instance.model, instance.views, instance.weights, comp.weights).grads;
    analytic.proj_weight[0] += options.corrupt;

    ComponentCheck check;
    check.component = comp.name;
    ClipModel probe = instance.model;
    for (std::size_t g = 0; g < Parameters::kGroupCount; ++g) {
      auto& values = probe.params().group(g);
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + options.step;
        const double up = objective(probe);
        values[i] = saved - options.step;
        const double down = objective(probe);
        values[i] = saved;
        const double numeric = (up - down) / (2.0 * options.step);
        const double err = gradient_error(analytic.group(g)[i], numeric);
        if (err > check.max_error) {
          check.max_error = err;
          check.worst_group = Parameters::group_name(g);
        }
        ++check.checked;
      }
    }
    check.passed = check.max_error <= options.tolerance;
    out.push_back(check);
  }
  return out;
}

}  // namespace causalign
