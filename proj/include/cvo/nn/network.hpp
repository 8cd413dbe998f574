#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cvo/core/random.hpp"

namespace cvo::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Preset { Small, Large };

// Dense regressor: hidden rectifier layers, affine output of width 3
// (dz, dx, dtheta).
struct NetworkSpec {
  int input_dim = 0;
  std::vector<int> hidden;
  int output_dim = 3;

  static NetworkSpec preset(Preset preset, int input_dim);
  int n_layers() const { return static_cast<int>(hidden.size()) + 1; }
  int layer_in(int layer) const { return layer == 0 ? input_dim : hidden[layer - 1]; }
  int layer_out(int layer) const {
    return layer == n_layers() - 1 ? output_dim : hidden[layer];
  }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

const char* preset_name(Preset preset);
Preset parse_preset(const std::string& name);

std::size_t param_count(const NetworkSpec& spec);

// Index ranges of one layer inside the flat parameter array. Weights are
// stored row-major as (out x in).
struct LayerSlice {
  int in = 0;
  int out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;

  friend bool operator==(const LayerSlice&, const LayerSlice&) = default;
};

std::vector<LayerSlice> param_layout(const NetworkSpec& spec);

struct ParamVector {
  std::vector<LayerSlice> layout;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

// Zero-valued parameters with the spec's layout.
ParamVector zero_params(const NetworkSpec& spec);

// Weights ~ N(0, 2 / fan_in), biases zero.
ParamVector init_params(const NetworkSpec& spec, Rng& rng);

inline ParamVector snapshot(const ParamVector& params) { return params; }
inline void restore(ParamVector& params, const ParamVector& copy) { params = copy; }

Matrix forward(const ParamVector& params, const NetworkSpec& spec, const Matrix& inputs);

// Layer activations retained for the backward pass.
struct ForwardTrace {
  const Matrix* inputs = nullptr;
  std::vector<Matrix> activations;  // post-rectifier per hidden layer, then output

  const Matrix& output() const { return activations.back(); }
};

ForwardTrace forward_trace(const ParamVector& params, const NetworkSpec& spec,
                           const Matrix& inputs);

// Accumulates d(objective)/d(params) into `grad` given d(objective)/d(output).
void backward(const ParamVector& params, const NetworkSpec& spec, const ForwardTrace& trace,
              const Matrix& d_output, std::span<double> grad);

// Mean over rows of the summed squared error across the three outputs.
double mse_loss(const Matrix& predictions, const Matrix& targets);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

struct Batch {
  Matrix inputs;   // batch x input_dim
  Matrix targets;  // batch x 3
};

LossGrad loss_and_grad(const ParamVector& params, const NetworkSpec& spec, const Batch& batch);

}  // namespace cvo::nn
