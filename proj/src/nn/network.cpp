#include "cvo/nn/network.hpp"

#include <cmath>
#include <stdexcept>

#include "cvo/core/contract.hpp"

namespace cvo::nn {

NetworkSpec NetworkSpec::preset(Preset preset, int input_dim) {
  NetworkSpec spec;
  spec.input_dim = input_dim;
  // Large is picked so its parameter count is a bit above 6x the small one.
  spec.hidden = preset == Preset::Small ? std::vector<int>{64, 64} : std::vector<int>{200, 200};
  return spec;
}

const char* preset_name(Preset preset) { return preset == Preset::Small ? "small" : "large"; }

Preset parse_preset(const std::string& name) {
  if (name == "small") return Preset::Small;
  if (name == "large") return Preset::Large;
  throw std::invalid_argument("unknown model preset '" + name + "'");
}

std::vector<LayerSlice> param_layout(const NetworkSpec& spec) {
  require(spec.input_dim >= 1 && spec.output_dim >= 1, "NetworkSpec: widths must be >= 1");
  for (int w : spec.hidden) require(w >= 1, "NetworkSpec: widths must be >= 1");
  std::vector<LayerSlice> layout;
  std::size_t offset = 0;
  for (int l = 0; l < spec.n_layers(); ++l) {
    LayerSlice s;
    s.in = spec.layer_in(l);
    s.out = spec.layer_out(l);
    s.weight_offset = offset;
    offset += static_cast<std::size_t>(s.in) * s.out;
    s.bias_offset = offset;
    offset += s.out;
    layout.push_back(s);
  }
  return layout;
}

std::size_t param_count(const NetworkSpec& spec) {
  std::size_t count = 0;
  for (int l = 0; l < spec.n_layers(); ++l)
    count += static_cast<std::size_t>(spec.layer_in(l) + 1) * spec.layer_out(l);
  return count;
}

ParamVector zero_params(const NetworkSpec& spec) {
  ParamVector p;
  p.layout = param_layout(spec);
  p.values.assign(param_count(spec), 0.0);
  return p;
}

ParamVector init_params(const NetworkSpec& spec, Rng& rng) {
  ParamVector p = zero_params(spec);
  for (const auto& s : p.layout) {
    const double stddev = std::sqrt(2.0 / s.in);
    for (std::size_t i = 0; i < static_cast<std::size_t>(s.in) * s.out; ++i)
      p.values[s.weight_offset + i] = rng.normal(0.0, stddev);
  }
  return p;
}

namespace {

using ConstMatrixMap = Eigen::Map<const Matrix>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstRowVectorMap = Eigen::Map<const Eigen::RowVectorXd>;
using RowVectorMap = Eigen::Map<Eigen::RowVectorXd>;

ConstMatrixMap weights(const ParamVector& p, const LayerSlice& s) {
  return ConstMatrixMap(p.values.data() + s.weight_offset, s.out, s.in);
}

ConstRowVectorMap biases(const ParamVector& p, const LayerSlice& s) {
  return ConstRowVectorMap(p.values.data() + s.bias_offset, s.out);
}

void check_input(const ParamVector& params, const NetworkSpec& spec, const Matrix& inputs) {
  require(params.values.size() == param_count(spec), "forward: parameter count mismatch");
  require(inputs.cols() == spec.input_dim, "forward: input width does not match spec");
}

}  // namespace

ForwardTrace forward_trace(const ParamVector& params, const NetworkSpec& spec,
                           const Matrix& inputs) {
  check_input(params, spec, inputs);
  ForwardTrace trace;
  trace.inputs = &inputs;
  trace.activations.reserve(params.layout.size());
  const Matrix* current = &inputs;
  for (std::size_t l = 0; l < params.layout.size(); ++l) {
    const auto& s = params.layout[l];
    Matrix z = (*current) * weights(params, s).transpose();
    z.rowwise() += biases(params, s);
    if (l + 1 < params.layout.size()) z = z.cwiseMax(0.0);
    trace.activations.push_back(std::move(z));
    current = &trace.activations.back();
  }
  return trace;
}

Matrix forward(const ParamVector& params, const NetworkSpec& spec, const Matrix& inputs) {
  ForwardTrace trace = forward_trace(params, spec, inputs);
  return std::move(trace.activations.back());
}

void backward(const ParamVector& params, const NetworkSpec& /*spec*/, const ForwardTrace& trace,
              const Matrix& d_output, std::span<double> grad) {
  require(grad.size() == params.values.size(), "backward: gradient size mismatch");
  Matrix delta = d_output;
  for (std::size_t l = params.layout.size(); l-- > 0;) {
    const auto& s = params.layout[l];
    const Matrix& layer_input = l == 0 ? *trace.inputs : trace.activations[l - 1];
    MatrixMap(grad.data() + s.weight_offset, s.out, s.in).noalias() +=
        delta.transpose() * layer_input;
    RowVectorMap(grad.data() + s.bias_offset, s.out) += delta.colwise().sum();
    if (l == 0) break;
    Matrix upstream = delta * weights(params, s);
    // Rectifier derivative: pass-through where the activation was positive.
    delta = (layer_input.array() > 0.0).select(upstream, 0.0);
  }
}

double mse_loss(const Matrix& predictions, const Matrix& targets) {
  require(predictions.rows() == targets.rows() && predictions.cols() == targets.cols(),
          "mse_loss: shape mismatch");
  require(predictions.rows() > 0, "mse_loss: empty batch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < predictions.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index c = 0; c < predictions.cols(); ++c) {
      const double e = targets(i, c) - predictions(i, c);
      row += e * e;
    }
    total += row;
  }
  return total / static_cast<double>(predictions.rows());
}

LossGrad loss_and_grad(const ParamVector& params, const NetworkSpec& spec, const Batch& batch) {
  require(batch.inputs.rows() == batch.targets.rows(), "loss_and_grad: row counts differ");
  require(batch.inputs.rows() > 0, "loss_and_grad: empty batch");
  const ForwardTrace trace = forward_trace(params, spec, batch.inputs);
  LossGrad out;
  out.loss = mse_loss(trace.output(), batch.targets);
  const Matrix d_output =
      (trace.output() - batch.targets) * (2.0 / static_cast<double>(batch.inputs.rows()));
  out.grad.assign(params.values.size(), 0.0);
  backward(params, spec, trace, d_output, out.grad);
  return out;
}

}  // namespace cvo::nn
