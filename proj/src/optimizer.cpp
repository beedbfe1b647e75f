#include "causalign/optimizer.hpp"

#include <cmath>

#include "causalign/error.hpp"

namespace causalign {

AdamWState AdamWState::zeros_like(const Parameters& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

void adamw_step(Parameters& params, const Parameters& grads, AdamWState& state, const AdamWOptions& options) {
  require(grads.total_size() == params.total_size(), "gradient does not match parameters");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(options.beta1, t);
  const double correction2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t g = 0; g < Parameters::kGroupCount; ++g) {
    auto& w = params.group(g);
    const auto& grad = grads.group(g);
    auto& m = state.first_moment.group(g);
    auto& v = state.second_moment.group(g);
    const bool decay = Parameters::group_decays(g);
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * grad[i];
      v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      if (decay) w[i] -= options.learning_rate * options.weight_decay * w[i];
      w[i] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
    }
  }
}

}  // namespace causalign
