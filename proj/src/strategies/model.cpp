#include "cvo/strategies/model.hpp"

#include "cvo/core/contract.hpp"

namespace cvo::strategies {

int input_dim(int n_rays, bool action_conditioned) {
  return 2 * n_rays + (action_conditioned ? 1 : 0);
}

Model make_model(nn::Preset preset, int n_rays, bool action_conditioned, Rng& init_rng) {
  Model model;
  model.spec = nn::NetworkSpec::preset(preset, input_dim(n_rays, action_conditioned));
  model.params = nn::init_params(model.spec, init_rng);
  model.action_conditioned = action_conditioned;
  return model;
}

double scale_depth(double meters) { return (meters - kDepthCenter) * kDepthScale; }

TensorSet tensorize(std::span<const envsim::StepRecord> records, bool action_conditioned) {
  TensorSet set;
  const int n_rays = records.empty() ? 0 : static_cast<int>(records.front().scan_t.size());
  const auto n = static_cast<Eigen::Index>(records.size());
  set.inputs.resize(n, input_dim(n_rays, action_conditioned));
  set.targets.resize(n, 3);
  set.actions.reserve(records.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    require(static_cast<int>(r.scan_t.size()) == n_rays &&
                static_cast<int>(r.scan_t1.size()) == n_rays,
            "tensorize: inconsistent scan length");
    for (int c = 0; c < n_rays; ++c) {
      set.inputs(i, c) = scale_depth(r.scan_t[c]);
      set.inputs(i, n_rays + c) = scale_depth(r.scan_t1[c]);
    }
    if (action_conditioned) set.inputs(i, 2 * n_rays) = envsim::encode(r.action);
    set.targets(i, 0) = r.gt.dz;
    set.targets(i, 1) = r.gt.dx;
    set.targets(i, 2) = r.gt.dtheta;
    set.actions.push_back(r.action);
  }
  return set;
}

nn::Batch gather(const TensorSet& set, std::span<const std::size_t> indices) {
  nn::Batch batch;
  const auto n = static_cast<Eigen::Index>(indices.size());
  batch.inputs.resize(n, set.inputs.cols());
  batch.targets.resize(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto src = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(i)]);
    batch.inputs.row(i) = set.inputs.row(src);
    batch.targets.row(i) = set.targets.row(src);
  }
  return batch;
}

nn::Matrix predict(const Model& model, const nn::Matrix& inputs) {
  return nn::forward(model.params, model.spec, inputs);
}

}  // namespace cvo::strategies
