#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cvo/core/random.hpp"
#include "cvo/nn/network.hpp"

namespace cvo::nn {

// |a - n| / max(|a|, |n|, floor); the floor keeps exactly-zero gradients
// (dead rectifier units) from dividing by zero.
double relative_error(double analytic, double numeric, double floor = 1e-6);

// Central differences of `objective` around `point`, compared against
// `analytic`. Returns the largest relative error over all coordinates.
double max_gradient_error(const std::function<double(std::span<const double>)>& objective,
                          std::span<const double> point, std::span<const double> analytic,
                          double h = 1e-5);

struct GradCheckCase {
  NetworkSpec spec;
  ParamVector params;
  Batch batch;
};

// Random small network, parameters and batch for gradient checking.
GradCheckCase random_gradcheck_case(Rng& rng);

// Max relative error of loss_and_grad against finite differences.
double check_loss_gradient(const GradCheckCase& c, double h = 1e-5);

}  // namespace cvo::nn
