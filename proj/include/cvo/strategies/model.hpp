#pragma once

#include <span>
#include <vector>

#include "cvo/core/random.hpp"
#include "cvo/envsim/simulator.hpp"
#include "cvo/nn/network.hpp"

namespace cvo::strategies {

struct Model {
  nn::NetworkSpec spec;
  nn::ParamVector params;
  bool action_conditioned = false;
};

int input_dim(int n_rays, bool action_conditioned);

Model make_model(nn::Preset preset, int n_rays, bool action_conditioned, Rng& init_rng);

// Fixed affine map applied to every depth reading before it reaches the
// network. Raw meters put the He-initialized output far from the targets and
// most of the first experience is spent undoing that offset.
inline constexpr double kDepthCenter = 2.0;
inline constexpr double kDepthScale = 0.02;
double scale_depth(double meters);

// Records laid out as network inputs (scan_t, scan_t1, optional action code)
// and (dz, dx, dtheta) targets.
struct TensorSet {
  nn::Matrix inputs;
  nn::Matrix targets;
  std::vector<envsim::Action> actions;

  Eigen::Index rows() const { return inputs.rows(); }
};

TensorSet tensorize(std::span<const envsim::StepRecord> records, bool action_conditioned);

// Rows of `set` picked by `indices`, in that order.
nn::Batch gather(const TensorSet& set, std::span<const std::size_t> indices);

nn::Matrix predict(const Model& model, const nn::Matrix& inputs);

}  // namespace cvo::strategies
