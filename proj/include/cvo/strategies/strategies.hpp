#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cvo/core/random.hpp"
#include "cvo/envsim/dataset.hpp"
#include "cvo/strategies/model.hpp"

namespace cvo::strategies {

enum class Kind { Naive, Ewc, Lwf, Replay };

struct StrategyConfig {
  Kind kind = Kind::Naive;
  double lambda = 100.0;      // EWC
  double alpha = 1.0;         // LwF
  std::size_t capacity = 0;   // Replay
  int max_epochs = 40;
  int batch_size = 32;
  double learning_rate = 2e-4;
  int patience = 5;
  bool action_conditioned = false;
  std::size_t fisher_samples = 512;

  static StrategyConfig naive() { return {}; }
  static StrategyConfig ewc(double lambda);
  static StrategyConfig lwf(double alpha);
  static StrategyConfig replay(std::size_t capacity);

  // Short identifier used in file names and CSV columns, e.g. "ewc_100".
  std::string label() const;
  void validate() const;
};

// Parses a label as produced by StrategyConfig::label().
StrategyConfig parse_strategy(const std::string& label);

struct EwcState {
  std::vector<double> anchors;
  std::vector<double> fisher;
  int experiences_absorbed = 0;
};

struct ReplayBuffer {
  std::size_t capacity = 0;
  std::vector<std::vector<envsim::StepRecord>> per_source;
  std::vector<std::uint32_t> source_ids;

  std::size_t size() const;
  std::vector<std::size_t> counts() const;
  std::vector<envsim::StepRecord> flatten() const;
};

struct StrategyState {
  EwcState ewc;
  ReplayBuffer buffer;
  int experiences_seen = 0;
};

struct TrainReport {
  int epochs_run = 0;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = 0;  // 1-based; 0 if no epoch ran
  double best_val_loss = 0.0;
  std::size_t stream_size = 0;
  double wall_seconds = 0.0;
};

TrainReport train_experience(Model& model, const envsim::ExperienceDataset& experience,
                             const StrategyConfig& strategy, const StrategyState& state, Rng& rng);

// Mean squared per-record gradient over n randomly chosen train records.
std::vector<double> compute_fisher_diag(const Model& model,
                                        const envsim::ExperienceDataset& experience,
                                        std::size_t n_samples, Rng& rng);

// Adds `fisher` to the running sum and moves the anchors to `params`.
void absorb_fisher(EwcState& state, std::span<const double> params,
                   std::span<const double> fisher);

struct PenaltyGrad {
  double value = 0.0;
  std::vector<double> grad;
};

PenaltyGrad ewc_penalty_and_grad(std::span<const double> params, const EwcState& state,
                                 double lambda);

PenaltyGrad lwf_loss_and_grad(const nn::ParamVector& student, const nn::ParamVector& teacher,
                              const nn::NetworkSpec& spec, const nn::Matrix& inputs,
                              double alpha);

void buffer_absorb(ReplayBuffer& buffer, const envsim::ExperienceDataset& experience, Rng& rng);

// Post-training bookkeeping: Fisher update for EWC, buffer update for replay.
void finish_experience(const Model& model, const envsim::ExperienceDataset& experience,
                       const StrategyConfig& strategy, StrategyState& state, Rng& fisher_rng,
                       Rng& buffer_rng);

TrainReport joint_train(Model& model, std::span<const envsim::ExperienceDataset> experiences,
                        const StrategyConfig& config, Rng& rng);

inline constexpr int kJointBatchSize = 128;

struct ScratchResult {
  double test_loss = 0.0;
  TrainReport report;
};

// Fresh model trained naively on one experience; the seed drives both the
// initialization and the epoch shuffles.
ScratchResult scratch_baseline(const envsim::ExperienceDataset& experience,
                               const StrategyConfig& config, nn::Preset preset,
                               std::uint64_t seed);

}  // namespace cvo::strategies
