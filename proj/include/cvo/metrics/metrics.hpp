#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cvo/envsim/simulator.hpp"
#include "cvo/strategies/model.hpp"

namespace cvo::metrics {

// L(k, j): test loss on experience j after training through experience k.
// Indices here are 0-based; the metric formulas below use 1-based k.
class LossMatrix {
 public:
  explicit LossMatrix(std::size_t n_experiences);
  static LossMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return n_; }
  // Each row may be written once; entries must be non-negative.
  void set_row(std::size_t k, std::span<const double> losses);
  bool row_written(std::size_t k) const { return written_[k]; }
  std::size_t rows_written() const;
  double at(std::size_t k, std::size_t j) const;
  std::span<const double> row(std::size_t k) const;

 private:
  std::size_t n_;
  std::vector<double> values_;
  std::vector<bool> written_;
};

double eval_loss(const strategies::Model& model, const strategies::TensorSet& set);
double eval_loss(const strategies::Model& model, std::span<const envsim::StepRecord> records);

// Sums per-record squared errors one record at a time.
double eval_loss_streaming(const strategies::Model& model, const strategies::TensorSet& set);

struct ComponentLosses {
  double z = 0.0;
  double x = 0.0;
  double theta = 0.0;
};

ComponentLosses component_losses(const strategies::Model& model,
                                 const strategies::TensorSet& set);
ComponentLosses component_losses(const strategies::Model& model,
                                 std::span<const envsim::StepRecord> records);
ComponentLosses component_losses(const nn::Matrix& predictions, const nn::Matrix& targets);

// k is 1-based and must be >= 2.
double bwt(const LossMatrix& m, std::size_t k);
double forgetting_ratio(const LossMatrix& m, std::size_t k);
// scratch[j] holds the from-scratch loss of experience j (0-based); entry 0
// is unused.
double fwt(const LossMatrix& m, std::span<const std::optional<double>> scratch, std::size_t k);

struct Summary {
  std::vector<double> checkpoint_mean;           // per k, mean over all j
  double average = 0.0;                          // lifetime mean of checkpoint_mean
  double final_value = 0.0;                      // last checkpoint_mean
  std::vector<std::optional<double>> past;       // mean over j < k
  std::vector<double> current;                   // L(k, k)
  std::vector<std::optional<double>> future;     // mean over j > k
  // Block means over experience ranges [12b, 12b + 12) at every checkpoint:
  // block_means[k][b].
  std::vector<std::vector<double>> block_means;
};

inline constexpr std::size_t kBlockWidth = 12;

Summary summarize(const LossMatrix& m);

struct Gaussian {
  double mean = 0.0;
  double stddev = 0.0;
};

// Indexed [action][component]; absent when the action has no test records.
struct VariabilityProfile {
  std::array<std::optional<std::array<Gaussian, 3>>, 3> predicted;
  std::array<std::optional<std::array<Gaussian, 3>>, 3> ground_truth;
};

VariabilityProfile prediction_variability(const strategies::Model& model,
                                          const strategies::TensorSet& pooled);
VariabilityProfile variability_from(const nn::Matrix& predictions, const nn::Matrix& targets,
                                    std::span<const envsim::Action> actions);

}  // namespace cvo::metrics
