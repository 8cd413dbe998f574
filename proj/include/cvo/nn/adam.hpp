#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cvo::nn {

struct AdamState {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  AdamState() = default;
  AdamState(std::size_t n_params, double lr) : learning_rate(lr), m(n_params, 0.0), v(n_params, 0.0) {}
};

// Bias-corrected Adam update applied in place.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state);

}  // namespace cvo::nn
