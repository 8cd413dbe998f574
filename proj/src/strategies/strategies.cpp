#include "cvo/strategies/strategies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cvo/core/contract.hpp"
#include "cvo/nn/adam.hpp"

namespace cvo::strategies {

StrategyConfig StrategyConfig::ewc(double lambda) {
  StrategyConfig c;
  c.kind = Kind::Ewc;
  c.lambda = lambda;
  return c;
}

StrategyConfig StrategyConfig::lwf(double alpha) {
  StrategyConfig c;
  c.kind = Kind::Lwf;
  c.alpha = alpha;
  return c;
}

StrategyConfig StrategyConfig::replay(std::size_t capacity) {
  StrategyConfig c;
  c.kind = Kind::Replay;
  c.capacity = capacity;
  return c;
}

namespace {

std::string format_number(double v) {
  // Integers print without a fractional part; everything else uses %g.
  if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string StrategyConfig::label() const {
  switch (kind) {
    case Kind::Naive: return "naive";
    case Kind::Ewc: return "ewc_" + format_number(lambda);
    case Kind::Lwf: return "lwf_" + format_number(alpha);
    case Kind::Replay: return "replay_" + std::to_string(capacity);
  }
  return "unknown";
}

void StrategyConfig::validate() const {
  require(max_epochs >= 1, "strategy: max_epochs must be >= 1");
  require(batch_size >= 1, "strategy: batch_size must be >= 1");
  require(patience >= 1, "strategy: patience must be >= 1");
  require(learning_rate > 0.0, "strategy: learning_rate must be positive");
  require(kind != Kind::Replay || capacity > 0, "strategy: replay capacity must be positive");
  require(lambda >= 0.0 && alpha >= 0.0, "strategy: penalty weights must be non-negative");
}

StrategyConfig parse_strategy(const std::string& label) {
  const auto sep = label.find('_');
  const std::string head = label.substr(0, sep);
  const std::string tail = sep == std::string::npos ? "" : label.substr(sep + 1);
  if (head == "naive" && tail.empty()) return StrategyConfig::naive();
  try {
    if (head == "ewc") return StrategyConfig::ewc(tail.empty() ? 100.0 : std::stod(tail));
    if (head == "lwf") return StrategyConfig::lwf(tail.empty() ? 1.0 : std::stod(tail));
    if (head == "replay" && !tail.empty()) {
      auto c = StrategyConfig::replay(std::stoull(tail));
      c.validate();
      return c;
    }
  } catch (const std::logic_error&) {
  }
  throw std::invalid_argument("unknown strategy '" + label + "'");
}

std::size_t ReplayBuffer::size() const {
  std::size_t n = 0;
  for (const auto& s : per_source) n += s.size();
  return n;
}

std::vector<std::size_t> ReplayBuffer::counts() const {
  std::vector<std::size_t> out;
  for (const auto& s : per_source) out.push_back(s.size());
  return out;
}

std::vector<envsim::StepRecord> ReplayBuffer::flatten() const {
  std::vector<envsim::StepRecord> out;
  out.reserve(size());
  for (const auto& s : per_source) out.insert(out.end(), s.begin(), s.end());
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

// Extra objective terms applied on top of the per-batch squared error.
struct Regularizers {
  const EwcState* ewc = nullptr;
  double lambda = 0.0;
  const nn::Matrix* teacher_outputs = nullptr;  // rows aligned with the stream
  double alpha = 0.0;
};

double full_batch_loss(const Model& model, const TensorSet& set) {
  return nn::mse_loss(predict(model, set.inputs), set.targets);
}

TrainReport fit(Model& model, const TensorSet& stream, const TensorSet& val, int batch_size,
                const StrategyConfig& config, const Regularizers& reg, Rng& rng) {
  require(stream.rows() > 0, "train: empty training stream");
  require(val.rows() > 0, "train: empty validation split");
  require(stream.inputs.cols() == model.spec.input_dim,
          "train: model input width does not match the action_conditioned flag");
  const auto start = Clock::now();

  TrainReport report;
  report.stream_size = static_cast<std::size_t>(stream.rows());
  nn::AdamState adam(model.params.size(), config.learning_rate);
  nn::ParamVector best = nn::snapshot(model.params);
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;

  std::vector<std::size_t> order(static_cast<std::size_t>(stream.rows()));
  std::vector<double> grad(model.params.size());
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(batch_size));
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const nn::Batch batch = gather(stream, idx);
      const double n = static_cast<double>(idx.size());

      const nn::ForwardTrace trace = nn::forward_trace(model.params, model.spec, batch.inputs);
      const double mse = nn::mse_loss(trace.output(), batch.targets);
      nn::Matrix d_output = (trace.output() - batch.targets) * (2.0 / n);
      if (reg.teacher_outputs != nullptr && reg.alpha != 0.0) {
        for (Eigen::Index i = 0; i < batch.inputs.rows(); ++i) {
          const auto src = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]);
          d_output.row(i) +=
              (trace.output().row(i) - reg.teacher_outputs->row(src)) * (2.0 * reg.alpha / n);
        }
      }
      std::fill(grad.begin(), grad.end(), 0.0);
      nn::backward(model.params, model.spec, trace, d_output, grad);
      if (reg.ewc != nullptr && reg.lambda != 0.0 && reg.ewc->experiences_absorbed > 0) {
        const PenaltyGrad pen = ewc_penalty_and_grad(model.params.values, *reg.ewc, reg.lambda);
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += pen.grad[i];
      }
      nn::adam_step(model.params.values, grad, adam);
      loss_sum += mse * n;
    }

    const double val_loss = full_batch_loss(model, val);
    report.train_loss.push_back(loss_sum / static_cast<double>(order.size()));
    report.val_loss.push_back(val_loss);
    report.epochs_run = epoch;
    if (val_loss < best_val) {
      best_val = val_loss;
      best = nn::snapshot(model.params);
      report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  nn::restore(model.params, best);
  report.best_val_loss = best_val;
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

}  // namespace

TrainReport train_experience(Model& model, const envsim::ExperienceDataset& experience,
                             const StrategyConfig& strategy, const StrategyState& state,
                             Rng& rng) {
  strategy.validate();
  require(!experience.train.empty(), "train_experience: empty train split");
  require(model.action_conditioned == strategy.action_conditioned,
          "train_experience: model and strategy disagree on action conditioning");
  const bool action = strategy.action_conditioned;

  TensorSet stream;
  if (strategy.kind == Kind::Replay && state.buffer.size() > 0) {
    std::vector<envsim::StepRecord> records = experience.train;
    for (const auto& source : state.buffer.per_source)
      records.insert(records.end(), source.begin(), source.end());
    stream = tensorize(records, action);
  } else {
    stream = tensorize(experience.train, action);
  }
  const TensorSet val = tensorize(experience.val, action);

  Regularizers reg;
  nn::Matrix teacher_outputs;
  if (strategy.kind == Kind::Ewc) {
    reg.ewc = &state.ewc;
    reg.lambda = strategy.lambda;
  } else if (strategy.kind == Kind::Lwf && state.experiences_seen > 0 && strategy.alpha != 0.0) {
    // The teacher is frozen for the whole experience, so its outputs on the
    // stream can be computed up front.
    teacher_outputs = predict(model, stream.inputs);
    reg.teacher_outputs = &teacher_outputs;
    reg.alpha = strategy.alpha;
  }
  return fit(model, stream, val, strategy.batch_size, strategy, reg, rng);
}

std::vector<double> compute_fisher_diag(const Model& model,
                                        const envsim::ExperienceDataset& experience,
                                        std::size_t n_samples, Rng& rng) {
  require(n_samples >= 1 && n_samples <= experience.train.size(),
          "compute_fisher_diag: sample count must be in [1, train size]");
  const TensorSet set = tensorize(experience.train, model.action_conditioned);
  const auto picks = rng.sample_indices(experience.train.size(), n_samples);
  std::vector<double> fisher(model.params.size(), 0.0);
  for (std::size_t idx : picks) {
    const std::size_t one[1] = {idx};
    const nn::LossGrad lg = nn::loss_and_grad(model.params, model.spec, gather(set, one));
    for (std::size_t i = 0; i < fisher.size(); ++i) fisher[i] += lg.grad[i] * lg.grad[i];
  }
  for (double& f : fisher) f /= static_cast<double>(n_samples);
  return fisher;
}

void absorb_fisher(EwcState& state, std::span<const double> params,
                   std::span<const double> fisher) {
  require(params.size() == fisher.size(), "absorb_fisher: size mismatch");
  if (state.fisher.empty()) state.fisher.assign(fisher.size(), 0.0);
  require(state.fisher.size() == fisher.size(), "absorb_fisher: size mismatch");
  for (std::size_t i = 0; i < fisher.size(); ++i) state.fisher[i] += fisher[i];
  state.anchors.assign(params.begin(), params.end());
  ++state.experiences_absorbed;
}

PenaltyGrad ewc_penalty_and_grad(std::span<const double> params, const EwcState& state,
                                 double lambda) {
  PenaltyGrad out;
  out.grad.assign(params.size(), 0.0);
  if (state.experiences_absorbed == 0) return out;
  require(state.fisher.size() == params.size() && state.anchors.size() == params.size(),
          "ewc_penalty_and_grad: state does not match parameters");
  double sum = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double d = params[i] - state.anchors[i];
    sum += state.fisher[i] * d * d;
    out.grad[i] = lambda * state.fisher[i] * d;
  }
  out.value = 0.5 * lambda * sum;
  return out;
}

PenaltyGrad lwf_loss_and_grad(const nn::ParamVector& student, const nn::ParamVector& teacher,
                              const nn::NetworkSpec& spec, const nn::Matrix& inputs,
                              double alpha) {
  require(student.size() == teacher.size(), "lwf_loss_and_grad: teacher/student mismatch");
  require(inputs.rows() > 0, "lwf_loss_and_grad: empty batch");
  const nn::Matrix target = nn::forward(teacher, spec, inputs);
  const nn::ForwardTrace trace = nn::forward_trace(student, spec, inputs);
  const double n = static_cast<double>(inputs.rows());
  PenaltyGrad out;
  out.value = alpha * nn::mse_loss(trace.output(), target);
  out.grad.assign(student.size(), 0.0);
  const nn::Matrix d_output = (trace.output() - target) * (2.0 * alpha / n);
  nn::backward(student, spec, trace, d_output, out.grad);
  return out;
}

void buffer_absorb(ReplayBuffer& buffer, const envsim::ExperienceDataset& experience, Rng& rng) {
  require(buffer.capacity > 0, "buffer_absorb: capacity must be positive");
  const std::size_t sources = buffer.per_source.size() + 1;
  const std::size_t base = buffer.capacity / sources;
  const std::size_t extra = buffer.capacity % sources;
  auto quota = [&](std::size_t s) { return base + (s < extra ? 1 : 0); };

  for (std::size_t s = 0; s + 1 < sources; ++s) {
    auto& list = buffer.per_source[s];
    if (list.size() <= quota(s)) continue;
    std::vector<envsim::StepRecord> kept;
    kept.reserve(quota(s));
    for (std::size_t i : rng.sample_indices(list.size(), quota(s))) kept.push_back(list[i]);
    list = std::move(kept);
  }
  const std::size_t take = std::min(quota(sources - 1), experience.train.size());
  std::vector<envsim::StepRecord> fresh;
  fresh.reserve(take);
  for (std::size_t i : rng.sample_indices(experience.train.size(), take))
    fresh.push_back(experience.train[i]);
  buffer.per_source.push_back(std::move(fresh));
  buffer.source_ids.push_back(experience.apartment_id);
}

void finish_experience(const Model& model, const envsim::ExperienceDataset& experience,
                       const StrategyConfig& strategy, StrategyState& state, Rng& fisher_rng,
                       Rng& buffer_rng) {
  if (strategy.kind == Kind::Ewc) {
    const std::size_t n = std::min(strategy.fisher_samples, experience.train.size());
    const auto fisher = compute_fisher_diag(model, experience, n, fisher_rng);
    absorb_fisher(state.ewc, model.params.values, fisher);
  } else if (strategy.kind == Kind::Replay) {
    state.buffer.capacity = strategy.capacity;
    buffer_absorb(state.buffer, experience, buffer_rng);
  }
  ++state.experiences_seen;
}

TrainReport joint_train(Model& model, std::span<const envsim::ExperienceDataset> experiences,
                        const StrategyConfig& config, Rng& rng) {
  require(!experiences.empty(), "joint_train: no experiences");
  std::vector<envsim::StepRecord> train, val;
  for (const auto& e : experiences) {
    train.insert(train.end(), e.train.begin(), e.train.end());
    val.insert(val.end(), e.val.begin(), e.val.end());
  }
  StrategyConfig joint = config;
  joint.kind = Kind::Naive;
  joint.batch_size = kJointBatchSize;
  joint.validate();
  const TensorSet stream = tensorize(train, config.action_conditioned);
  const TensorSet val_set = tensorize(val, config.action_conditioned);
  return fit(model, stream, val_set, joint.batch_size, joint, {}, rng);
}

ScratchResult scratch_baseline(const envsim::ExperienceDataset& experience,
                               const StrategyConfig& config, nn::Preset preset,
                               std::uint64_t seed) {
  Rng rng(seed);
  StrategyConfig naive = config;
  naive.kind = Kind::Naive;
  Model model = make_model(preset, experience.n_rays, config.action_conditioned, rng);
  ScratchResult out;
  out.report = train_experience(model, experience, naive, StrategyState{}, rng);
  require(!experience.test.empty(), "scratch_baseline: empty test split");
  const TensorSet test = tensorize(experience.test, config.action_conditioned);
  out.test_loss = nn::mse_loss(predict(model, test.inputs), test.targets);
  return out;
}

}  // namespace cvo::strategies
