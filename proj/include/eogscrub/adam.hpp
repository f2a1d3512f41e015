#pragma once

#include <cmath>
#include <vector>

#include "eogscrub/unet.hpp"

namespace eogscrub {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment buffers mirroring the parameter list, plus the shared
// step counter. Lazily sized on the first step.
template <typename T>
struct AdamState {
  struct Slot {
    std::vector<T> m, v;
  };
  std::vector<Slot> slots;
  uint64_t t = 0;
};

// One bias-corrected Adam update over every parameter view.
template <typename T>
void adam_step(std::vector<ParamView<T>>& params, AdamState<T>& state, const AdamConfig& cfg) {
  if (state.slots.empty()) {
    state.slots.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      state.slots[i].m.assign(params[i].size, T(0));
      state.slots[i].v.assign(params[i].size, T(0));
    }
  }
  if (state.slots.size() != params.size())
    throw ShapeMismatch("adam_step: state does not mirror the parameter list");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, double(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& slot = state.slots[i];
    if (slot.m.size() != p.size)
      throw ShapeMismatch("adam_step: moment shape mismatch for " + p.name);
    for (size_t j = 0; j < p.size; ++j) {
      const double g = double(p.grad[j]);
      const double m = cfg.beta1 * double(slot.m[j]) + (1.0 - cfg.beta1) * g;
      const double v = cfg.beta2 * double(slot.v[j]) + (1.0 - cfg.beta2) * g * g;
      slot.m[j] = T(m);
      slot.v[j] = T(v);
      const double m_hat = m / bc1;
      const double v_hat = v / bc2;
      p.value[j] = T(double(p.value[j]) - cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
    }
  }
}

}  // namespace eogscrub
