#include "cvo/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace cvo::nn {

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

double max_gradient_error(const std::function<double(std::span<const double>)>& objective,
                          std::span<const double> point, std::span<const double> analytic,
                          double h) {
  std::vector<double> x(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = objective(x);
    x[i] = saved - h;
    const double down = objective(x);
    x[i] = saved;
    worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

GradCheckCase random_gradcheck_case(Rng& rng) {
  GradCheckCase c;
  c.spec.input_dim = rng.uniform_int(1, 8);
  const int depth = rng.uniform_int(0, 3);
  for (int l = 0; l < depth; ++l) c.spec.hidden.push_back(rng.uniform_int(1, 10));
  c.params = init_params(c.spec, rng);
  // Nonzero biases exercise the bias gradient.
  for (const auto& s : c.params.layout)
    for (int o = 0; o < s.out; ++o) c.params.values[s.bias_offset + o] = rng.normal(0.0, 0.1);
  const int n = rng.uniform_int(1, 9);
  c.batch.inputs.resize(n, c.spec.input_dim);
  c.batch.targets.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < c.spec.input_dim; ++j) c.batch.inputs(i, j) = rng.normal(0.0, 1.0);
    for (int j = 0; j < 3; ++j) c.batch.targets(i, j) = rng.normal(0.0, 0.5);
  }
  return c;
}

double check_loss_gradient(const GradCheckCase& c, double h) {
  const LossGrad lg = loss_and_grad(c.params, c.spec, c.batch);
  ParamVector probe = c.params;
  auto objective = [&](std::span<const double> x) {
    std::copy(x.begin(), x.end(), probe.values.begin());
    return mse_loss(forward(probe, c.spec, c.batch.inputs), c.batch.targets);
  };
  return max_gradient_error(objective, c.params.values, lg.grad, h);
}

}  // namespace cvo::nn
