#include "cvo/nn/adam.hpp"

#include <cmath>

#include "cvo/core/contract.hpp"

namespace cvo::nn {

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state) {
  require(params.size() == grad.size(), "adam_step: gradient size mismatch");
  require(state.m.size() == params.size() && state.v.size() == params.size(),
          "adam_step: moment size mismatch");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace cvo::nn
