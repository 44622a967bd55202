#pragma once

#include <vector>

#include "fraclab/nn/network.hpp"

namespace fraclab::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  long long step = 0;  // number of updates applied so far
};

AdamState make_adam_state(const ModelParameters& params);

/// One bias-corrected Adam update; increments state.step first so the
/// correction uses t >= 1.
void adam_step(ModelParameters& params, const ModelParameters& grads,
               AdamState& state, const AdamConfig& config = {});

}  // namespace fraclab::nn
