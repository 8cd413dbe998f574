#include "cvo/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "cvo/core/contract.hpp"

namespace cvo::metrics {

LossMatrix::LossMatrix(std::size_t n_experiences)
    : n_(n_experiences), values_(n_experiences * n_experiences, 0.0), written_(n_experiences) {
  require(n_experiences >= 1, "LossMatrix: needs at least one experience");
}

LossMatrix LossMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  LossMatrix m(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) m.set_row(k, rows[k]);
  return m;
}

void LossMatrix::set_row(std::size_t k, std::span<const double> losses) {
  require(k < n_, "LossMatrix: row index out of range");
  require(!written_[k], "LossMatrix: row written twice");
  require(losses.size() == n_, "LossMatrix: row length mismatch");
  for (std::size_t j = 0; j < n_; ++j) {
    require(losses[j] >= 0.0, "LossMatrix: negative loss");
    values_[k * n_ + j] = losses[j];
  }
  written_[k] = true;
}

std::size_t LossMatrix::rows_written() const {
  std::size_t n = 0;
  for (bool w : written_) n += w ? 1 : 0;
  return n;
}

double LossMatrix::at(std::size_t k, std::size_t j) const {
  require(k < n_ && j < n_, "LossMatrix: index out of range");
  require(written_[k], "LossMatrix: row not populated");
  return values_[k * n_ + j];
}

std::span<const double> LossMatrix::row(std::size_t k) const {
  require(k < n_ && written_[k], "LossMatrix: row not populated");
  return {values_.data() + k * n_, n_};
}

double eval_loss(const strategies::Model& model, const strategies::TensorSet& set) {
  require(set.rows() > 0, "eval_loss: no records");
  return nn::mse_loss(strategies::predict(model, set.inputs), set.targets);
}

double eval_loss(const strategies::Model& model, std::span<const envsim::StepRecord> records) {
  return eval_loss(model, strategies::tensorize(records, model.action_conditioned));
}

double eval_loss_streaming(const strategies::Model& model, const strategies::TensorSet& set) {
  require(set.rows() > 0, "eval_loss: no records");
  double total = 0.0;
  for (Eigen::Index i = 0; i < set.rows(); ++i) {
    const nn::Matrix one = set.inputs.row(i);
    const nn::Matrix pred = strategies::predict(model, one);
    double row = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double e = set.targets(i, c) - pred(0, c);
      row += e * e;
    }
    total += row;
  }
  return total / static_cast<double>(set.rows());
}

ComponentLosses component_losses(const nn::Matrix& predictions, const nn::Matrix& targets) {
  require(predictions.rows() > 0 && predictions.rows() == targets.rows(),
          "component_losses: shape mismatch or no records");
  ComponentLosses out;
  for (Eigen::Index i = 0; i < targets.rows(); ++i) {
    out.z += std::abs(targets(i, 0) - predictions(i, 0));
    out.x += std::abs(targets(i, 1) - predictions(i, 1));
    out.theta += std::abs(targets(i, 2) - predictions(i, 2));
  }
  const double n = static_cast<double>(targets.rows());
  out.z /= n;
  out.x /= n;
  out.theta /= n;
  return out;
}

ComponentLosses component_losses(const strategies::Model& model,
                                 const strategies::TensorSet& set) {
  return component_losses(strategies::predict(model, set.inputs), set.targets);
}

ComponentLosses component_losses(const strategies::Model& model,
                                 std::span<const envsim::StepRecord> records) {
  return component_losses(model, strategies::tensorize(records, model.action_conditioned));
}

namespace {

void check_k(const LossMatrix& m, std::size_t k) {
  require(k >= 2, "continual metric: k must be >= 2");
  require(k <= m.size(), "continual metric: k exceeds the experience count");
  for (std::size_t r = 0; r < k; ++r)
    require(m.row_written(r), "continual metric: rows 1..k must be populated");
}

}  // namespace

double bwt(const LossMatrix& m, std::size_t k) {
  check_k(m, k);
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j) sum += m.at(j, j) - m.at(k - 1, j);
  return sum / static_cast<double>(k - 1);
}

double forgetting_ratio(const LossMatrix& m, std::size_t k) {
  check_k(m, k);
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    const double diag = m.at(j, j);
    require(diag > 0.0, "forgetting_ratio: zero diagonal entry");
    sum += std::max(0.0, m.at(k - 1, j) - diag) / diag;
  }
  return sum / static_cast<double>(k - 1);
}

double fwt(const LossMatrix& m, std::span<const std::optional<double>> scratch, std::size_t k) {
  check_k(m, k);
  double sum = 0.0;
  for (std::size_t j = 1; j < k; ++j) {
    require(j < scratch.size() && scratch[j].has_value(), "fwt: missing scratch baseline");
    sum += *scratch[j] - m.at(j, j);
  }
  return sum / static_cast<double>(k - 1);
}

Summary summarize(const LossMatrix& m) {
  const std::size_t n = m.size();
  require(m.rows_written() == n, "summarize: matrix not fully populated");
  Summary s;
  const std::size_t n_blocks = (n + kBlockWidth - 1) / kBlockWidth;
  for (std::size_t k = 0; k < n; ++k) {
    double all = 0.0, past = 0.0, future = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m.at(k, j);
      all += v;
      if (j < k) past += v;
      if (j > k) future += v;
    }
    s.checkpoint_mean.push_back(all / static_cast<double>(n));
    s.current.push_back(m.at(k, k));
    s.past.push_back(k > 0 ? std::optional<double>(past / static_cast<double>(k)) : std::nullopt);
    s.future.push_back(k + 1 < n ? std::optional<double>(future / static_cast<double>(n - k - 1))
                                 : std::nullopt);
    std::vector<double> blocks;
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const std::size_t lo = b * kBlockWidth, hi = std::min(n, lo + kBlockWidth);
      double sum = 0.0;
      for (std::size_t j = lo; j < hi; ++j) sum += m.at(k, j);
      blocks.push_back(sum / static_cast<double>(hi - lo));
    }
    s.block_means.push_back(std::move(blocks));
  }
  double total = 0.0;
  for (double v : s.checkpoint_mean) total += v;
  s.average = total / static_cast<double>(n);
  s.final_value = s.checkpoint_mean.back();
  return s;
}

namespace {

std::array<Gaussian, 3> gaussian_of(const nn::Matrix& values, std::span<const std::size_t> rows) {
  std::array<Gaussian, 3> out{};
  const double n = static_cast<double>(rows.size());
  for (int c = 0; c < 3; ++c) {
    // Deviations are taken from the first value so a constant column has
    // exactly zero spread.
    const double shift = values(static_cast<Eigen::Index>(rows[0]), c);
    double sum = 0.0;
    for (std::size_t r : rows) sum += values(static_cast<Eigen::Index>(r), c) - shift;
    const double offset = sum / n;
    double sq = 0.0;
    for (std::size_t r : rows) {
      const double d = values(static_cast<Eigen::Index>(r), c) - shift - offset;
      sq += d * d;
    }
    out[c] = {shift + offset, std::sqrt(sq / n)};
  }
  return out;
}

}  // namespace

VariabilityProfile variability_from(const nn::Matrix& predictions, const nn::Matrix& targets,
                                    std::span<const envsim::Action> actions) {
  require(predictions.rows() == targets.rows() &&
              static_cast<std::size_t>(targets.rows()) == actions.size(),
          "prediction_variability: row counts differ");
  std::array<std::vector<std::size_t>, 3> by_action;
  for (std::size_t i = 0; i < actions.size(); ++i)
    by_action[static_cast<std::size_t>(actions[i])].push_back(i);
  VariabilityProfile p;
  for (std::size_t a = 0; a < 3; ++a) {
    if (by_action[a].empty()) continue;
    p.predicted[a] = gaussian_of(predictions, by_action[a]);
    p.ground_truth[a] = gaussian_of(targets, by_action[a]);
  }
  return p;
}

VariabilityProfile prediction_variability(const strategies::Model& model,
                                          const strategies::TensorSet& pooled) {
  return variability_from(strategies::predict(model, pooled.inputs), pooled.targets,
                          pooled.actions);
}

}  // namespace cvo::metrics
