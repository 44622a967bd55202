#include "fraclab/nn/optimizer.hpp"

#include <cmath>

#include "fraclab/errors.hpp"

namespace fraclab::nn {

AdamState make_adam_state(const ModelParameters& params) {
  AdamState s;
  for (const auto& t : params.tensors) {
    s.first_moment.emplace_back(t.value.shape());
    s.second_moment.emplace_back(t.value.shape());
  }
  return s;
}

void adam_step(ModelParameters& params, const ModelParameters& grads,
               AdamState& state, const AdamConfig& cfg) {
  if (grads.tensors.size() != params.tensors.size() ||
      state.first_moment.size() != params.tensors.size()) {
    throw DataError("adam_step: gradient/state layout differs from parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    auto p = params.tensors[i].value.data();
    auto g = grads.tensors[i].value.data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    if (g.size() != p.size()) {
      throw DataError("adam_step: gradient shape differs for " +
                      params.tensors[i].name);
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      p[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace fraclab::nn
